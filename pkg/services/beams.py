"""Basis beam synthesis: grids, Laguerre-Gaussian and vector Bessel beams, Airy references."""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from models import (
    BasisKind,
    BeamBasis,
    BesselParameters,
    Grid,
    LgParameters,
    Polarization,
    SampledScalarField,
    SampledVectorField,
)
from utils.errors import InvalidArgumentError

from .propagation import matrix_fourier_transform

logger = logging.getLogger(__name__)

# Vacuum constants in the wavelength-normalised unit system (Z0 = c = 1)
EPSILON_0 = 1.0
MU_0 = 1.0
SPEED_OF_LIGHT = 1.0 / np.sqrt(EPSILON_0 * MU_0)

# Components of a Bessel-family field as {m: c_m}, meaning sum_m c_m J_m(k_t r) exp(i m phi)
Harmonics = Dict[int, complex]


def make_grid(
    nx: int,
    ny: int,
    dx: float,
    dy: float,
    center: Tuple[float, float] = (0.0, 0.0),
    z: float = 0.0,
) -> Grid:
    """
    Build a uniform grid symmetric about `center`.

    Args:
        nx, ny: Sample counts (at least 2)
        dx, dy: Sample pitch
        center: (x0, y0) offset of the grid center
        z: Plane coordinate

    Returns:
        Grid with x_i = x0 + (i - (nx - 1)/2) * dx
    """
    if nx < 2 or ny < 2:
        raise InvalidArgumentError(f"Grid needs at least 2 samples per axis, got {nx}x{ny}")
    if not (dx > 0 and dy > 0):
        raise InvalidArgumentError(f"Grid pitch must be positive, got dx={dx}, dy={dy}")
    return Grid(nx=nx, ny=ny, dx=dx, dy=dy, x0=center[0], y0=center[1], z=z)


def square_grid(n: int, pitch: float, z: float = 0.0) -> Grid:
    """n x n grid of pitch `pitch` centered on the optical axis."""
    return make_grid(n, n, pitch, pitch, (0.0, 0.0), z)


def evaluate_lg(
    P: int,
    L: int,
    w0: float,
    k0: float,
    grid: Grid,
    center: Optional[Tuple[float, float]] = None,
    normalized: bool = True,
) -> SampledScalarField:
    """
    Laguerre-Gaussian envelope on the plane `grid.z` (waist at z = 0).

    The envelope excludes the exp(-i k0 z) carrier. With `normalized` the
    plane-spanning intensity integral is 1; otherwise the fundamental mode has
    unit amplitude on axis at the waist.

    Args:
        P: Radial index (>= 0)
        L: Azimuthal index
        w0: Waist radius
        k0: Vacuum wavenumber
        grid: Sampling grid
        center: Beam axis position, defaults to the grid center

    Returns:
        Sampled scalar field
    """
    if P < 0:
        raise InvalidArgumentError(f"LG radial index must be >= 0, got {P}")
    if not (w0 > 0 and k0 > 0):
        raise InvalidArgumentError(f"LG waist and wavenumber must be positive, got w0={w0}, k0={k0}")

    z = grid.z
    z_r = k0 * w0 ** 2 / 2
    q = z + 1j * z_r
    w = w0 * np.sqrt(1 + (z / z_r) ** 2)
    r, phi = grid.polar(center)
    m = abs(L)

    norm = np.exp(0.5 * (special.gammaln(P + 1) - special.gammaln(P + m + 1)))
    if normalized:
        norm *= np.sqrt(2 / (np.pi * w0 ** 2))

    values = (
        1j * norm * z_r / q
        * ((1j * k0 * w0 * r / (np.sqrt(2) * q)) ** m if m else 1.0)
        * (-np.conj(q) / q) ** P
        * special.eval_genlaguerre(P, m, 2 * r ** 2 / w ** 2)
        * np.exp(-1j * k0 * r ** 2 / (2 * q) - 1j * L * phi)
    )
    return SampledScalarField(grid=grid, values=values, k0=k0)


def polarization_weights(polarization: Polarization) -> Tuple[complex, complex]:
    """(alpha, beta) Jones weights of a polarization preset."""
    presets = {
        Polarization.X: (1.0 + 0j, 0j),
        Polarization.Y: (0j, 1.0 + 0j),
        Polarization.CIRCULAR_PLUS: (1 / np.sqrt(2) + 0j, 1j / np.sqrt(2)),
        Polarization.CIRCULAR_MINUS: (1 / np.sqrt(2) + 0j, -1j / np.sqrt(2)),
    }
    return presets[Polarization(polarization)]


def _bessel_harmonics(theta: float, L: int, alpha: complex, beta: complex, E0: float, k0: float):
    """Electric field components as Bessel harmonics, without the exp(i k_z z) factor."""
    k_t = k0 * np.sin(theta)
    k_z = k0 * np.cos(theta)
    c = 1j * k_t / (2 * k_z)
    Ex = {L: E0 * alpha}
    Ey = {L: E0 * beta}
    Ez = {L - 1: E0 * c * (alpha + 1j * beta), L + 1: -E0 * c * (alpha - 1j * beta)}
    return [Ex, Ey, Ez], k_t, k_z


def _add(target: Harmonics, m: int, value: complex) -> None:
    target[m] = target.get(m, 0j) + value


def _d_dx(h: Harmonics, k_t: float) -> Harmonics:
    # d/dx [J_m e^{im phi}] = (k_t/2)(psi_{m-1} - psi_{m+1})
    out: Harmonics = {}
    for m, c in h.items():
        _add(out, m - 1, 0.5 * k_t * c)
        _add(out, m + 1, -0.5 * k_t * c)
    return out


def _d_dy(h: Harmonics, k_t: float) -> Harmonics:
    # d/dy [J_m e^{im phi}] = (i k_t/2)(psi_{m-1} + psi_{m+1})
    out: Harmonics = {}
    for m, c in h.items():
        _add(out, m - 1, 0.5j * k_t * c)
        _add(out, m + 1, 0.5j * k_t * c)
    return out


def _combine(*terms: Tuple[complex, Harmonics]) -> Harmonics:
    out: Harmonics = {}
    for weight, h in terms:
        for m, c in h.items():
            _add(out, m, weight * c)
    return out


def _curl(E: List[Harmonics], k_t: float, k_z: float) -> List[Harmonics]:
    """Curl of a field whose z dependence is exp(i k_z z)."""
    Ex, Ey, Ez = E
    ikz = 1j * k_z
    return [
        _combine((1.0, _d_dy(Ez, k_t)), (-ikz, Ey)),
        _combine((ikz, Ex), (-1.0, _d_dx(Ez, k_t))),
        _combine((1.0, _d_dx(Ey, k_t)), (-1.0, _d_dy(Ex, k_t))),
    ]


def _sample(h: Harmonics, k_t: float, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    values = np.zeros(r.shape, dtype=np.complex128)
    for m, c in h.items():
        if c != 0:
            values += c * special.jv(m, k_t * r) * np.exp(1j * m * phi)
    return values


def evaluate_bessel_vector(
    theta: float,
    L: int,
    alpha: complex,
    beta: complex,
    E0: float,
    k0: float,
    grid: Grid,
    center: Optional[Tuple[float, float]] = None,
) -> SampledVectorField:
    """
    Vector Bessel beam with its magnetic field from the closed-form curl.

    E carries exp(i L phi + i k_z z) with k_t = k0 sin(theta), k_z = k0 cos(theta).
    Fields are phasors of an exp(-i omega t) time dependence, so Faraday's law
    reads curl(E) = i mu0 omega H and an exp(+i k_z z) beam carries its
    time-averaged flux along +z. Writing the same field against an
    exp(+i omega t) carrier flips the sign of omega and of k_z together.

    Args:
        theta: Cone angle in radians, 0 <= theta < pi/2
        L: Topological charge
        alpha, beta: Jones weights of the transverse polarization
        E0: Amplitude
        k0: Vacuum wavenumber
        grid: Sampling grid; grid.z is the propagation coordinate
        center: Beam axis position, defaults to the grid center

    Returns:
        Sampled vector field
    """
    if not (0 <= theta < np.pi / 2):
        raise InvalidArgumentError(f"Bessel cone angle must lie in [0, pi/2), got {theta}")
    if alpha == 0 and beta == 0:
        raise InvalidArgumentError("Polarization weights (alpha, beta) must not both vanish")
    if k0 <= 0:
        raise InvalidArgumentError(f"Wavenumber must be positive, got {k0}")

    E_h, k_t, k_z = _bessel_harmonics(theta, L, complex(alpha), complex(beta), E0, k0)
    curl_h = _curl(E_h, k_t, k_z)
    omega = k0 * SPEED_OF_LIGHT

    r, phi = grid.polar(center)
    carrier = np.exp(1j * k_z * grid.z)
    E = np.stack([_sample(h, k_t, r, phi) for h in E_h]) * carrier
    H = np.stack([_sample(h, k_t, r, phi) for h in curl_h]) * carrier / (1j * MU_0 * omega)
    return SampledVectorField(grid=grid, E=E, H=H, k0=k0)


def evaluate_bessel_member(params: BesselParameters, k0: float, grid: Grid, center=None) -> SampledVectorField:
    """Vector Bessel beam from a parameter record."""
    return evaluate_bessel_vector(params.theta, params.L, params.alpha, params.beta, params.E0, k0, grid, center)


def embed_scalar_as_vector(field: SampledScalarField) -> SampledVectorField:
    """x-polarised vector field with H from the vacuum plane-wave impedance."""
    impedance = np.sqrt(MU_0 / EPSILON_0)
    zeros = np.zeros_like(field.values)
    E = np.stack([field.values, zeros, zeros])
    H = np.stack([zeros, field.values / impedance, zeros])
    return SampledVectorField(grid=field.grid, E=E, H=H, k0=field.k0)


def evaluate_aperture_airy(
    R_ap: float,
    k0: float,
    f: float,
    grid_in: Optional[Grid],
    grid_out: Grid,
    exact_aperture: bool = False,
) -> SampledScalarField:
    """
    Fourier-plane field of a uniformly filled disk of radius `R_ap` behind a lens.

    The analytic form is (pi R^2 / (i lambda f)) * 2 J1(x)/x with
    x = k0 R rho / f. With `exact_aperture` the disk is the set of
    `grid_in` samples with rho <= R and the transform is evaluated
    exactly, matching `fourier_lens` of the same mask.

    Args:
        R_ap: Aperture radius
        k0: Vacuum wavenumber
        f: Lens focal length
        grid_in: Aperture-plane grid (required for `exact_aperture`)
        grid_out: Fourier-plane grid

    Returns:
        Sampled scalar field on `grid_out`
    """
    if not (R_ap > 0 and f > 0):
        raise InvalidArgumentError(f"Aperture radius and focal length must be positive, got R={R_ap}, f={f}")

    if exact_aperture:
        if grid_in is None:
            raise InvalidArgumentError("exact_aperture requires the aperture-plane grid")
        rho_in, _ = grid_in.polar((0.0, 0.0))
        disk = (rho_in ** 2 <= R_ap ** 2).astype(np.complex128)
        values = matrix_fourier_transform(disk, grid_in, grid_out, k0, f)
        return SampledScalarField(grid=grid_out, values=values, k0=k0)

    wavelength = 2 * np.pi / k0
    rho, _ = grid_out.polar((0.0, 0.0))
    x = k0 * R_ap * rho / f
    safe = np.where(x == 0, 1.0, x)
    jinc = np.where(x == 0, 1.0, 2 * special.j1(safe) / safe)
    values = np.pi * R_ap ** 2 / (1j * wavelength * f) * jinc
    return SampledScalarField(grid=grid_out, values=values, k0=k0)


def airy_first_zero(R_ap: float, k0: float, f: float) -> float:
    """Radius of the first dark ring of the Airy pattern."""
    return float(special.jn_zeros(1, 1)[0] * f / (k0 * R_ap))


def theta_schedule(theta_max: float, N: int) -> np.ndarray:
    """N cone angles evenly spaced in [0, theta_max]; a single member gets theta_max."""
    if N < 1:
        raise InvalidArgumentError(f"Basis size must be >= 1, got {N}")
    if N == 1:
        return np.array([float(theta_max)])
    return np.linspace(0.0, theta_max, N)


def lg_basis(
    N: int,
    L: int,
    w0: float,
    k0: float,
    grid: Grid,
    radial_indices: Optional[Sequence[int]] = None,
    z_planes: Iterable[float] = (),
    initial_z: Optional[float] = None,
    normalized: bool = True,
) -> BeamBasis:
    """
    Scalar LG basis with radial indices P = 0..N-1 at fixed L.

    Args:
        N: Number of members
        L: Shared azimuthal index
        w0: Shared waist
        k0: Vacuum wavenumber
        grid: Target-plane grid
        radial_indices: Explicit radial indices instead of 0..N-1
        z_planes: Additional target planes (volumes, plane pairs)
        initial_z: Initial plane at which the basis is also evaluated

    Returns:
        BeamBasis of kind scalar
    """
    indices = list(radial_indices) if radial_indices is not None else list(range(N))
    if len(indices) < 1:
        raise InvalidArgumentError("LG basis needs at least one member")

    def plane(g: Grid):
        return [evaluate_lg(P, L, w0, k0, g, normalized=normalized) for P in indices]

    basis = BeamBasis(
        kind=BasisKind.SCALAR,
        members=plane(grid),
        initial_members=plane(grid.at_z(initial_z)) if initial_z is not None else [],
        layers=[plane(grid.at_z(z)) for z in z_planes],
        parameters=[LgParameters(P=P, L=L, w0=w0) for P in indices],
    )
    logger.debug("LG basis: N=%d L=%d w0=%g on %dx%d grid", basis.size, L, w0, grid.nx, grid.ny)
    return basis


def bessel_basis(
    thetas: Sequence[float],
    L: int,
    alpha: complex,
    beta: complex,
    k0: float,
    grid: Grid,
    E0: float = 1.0,
    z_planes: Iterable[float] = (),
    initial_z: Optional[float] = None,
) -> BeamBasis:
    """Vector Bessel basis, one member per cone angle."""
    params = [BesselParameters(theta=float(t), L=L, alpha=alpha, beta=beta, E0=E0) for t in thetas]
    if not params:
        raise InvalidArgumentError("Bessel basis needs at least one cone angle")

    def plane(g: Grid):
        return [evaluate_bessel_member(p, k0, g) for p in params]

    basis = BeamBasis(
        kind=BasisKind.VECTOR,
        members=plane(grid),
        initial_members=plane(grid.at_z(initial_z)) if initial_z is not None else [],
        layers=[plane(grid.at_z(z)) for z in z_planes],
        parameters=params,
    )
    logger.debug("Bessel basis: N=%d L=%d theta_max=%g", basis.size, L, max(thetas))
    return basis


def _fourth_order_derivative(sample, h: float) -> np.ndarray:
    return (sample(-2 * h) - 8 * sample(-h) + 8 * sample(h) - sample(2 * h)) / (12 * h)


def maxwell_residuals(
    params: BesselParameters,
    k0: float,
    grid: Grid,
    step: Optional[float] = None,
) -> Dict[str, float]:
    """
    Relative Maxwell residuals of an analytic vector Bessel beam.

    Derivatives are fourth-order central differences of the analytic field
    evaluated at sub-pitch offsets about every sample of `grid`.

    Args:
        params: Beam parameters
        k0: Vacuum wavenumber
        grid: Evaluation grid
        step: Difference step, defaults to 2% of the grid pitch

    Returns:
        {"divergence": |div E| / (k0 |E|), "curl": |curl E - i mu0 omega H| / (k0 |E|)}
    """
    h = step if step is not None else 0.02 * min(grid.dx, grid.dy)
    center = (grid.x0, grid.y0)
    field = evaluate_bessel_member(params, k0, grid, center)

    def along(axis: str):
        def sample(offset: float) -> np.ndarray:
            shift = {"x": (offset, 0.0, 0.0), "y": (0.0, offset, 0.0), "z": (0.0, 0.0, offset)}[axis]
            return evaluate_bessel_member(params, k0, grid.shifted(*shift), center).E
        return _fourth_order_derivative(sample, h)

    dEx, dEy, dEz = along("x"), along("y"), along("z")
    divergence = dEx[0] + dEy[1] + dEz[2]
    curl = np.stack([
        dEy[2] - dEz[1],
        dEz[0] - dEx[2],
        dEx[1] - dEy[0],
    ])
    omega = k0 * SPEED_OF_LIGHT
    scale = k0 * np.linalg.norm(field.E)
    residuals = {
        "divergence": float(np.linalg.norm(divergence) / scale),
        "curl": float(np.linalg.norm(curl - 1j * MU_0 * omega * field.H) / scale),
    }
    logger.debug("Maxwell residuals for theta=%g L=%d: %s", params.theta, params.L, residuals)
    return residuals
