"""End-to-end QME pipelines and beam analyses."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from models import (
    BeamBasis,
    MeasureMatrix,
    MeasureTag,
    OptimizationReport,
    RegionOfInterest,
    SampledField,
    SampledScalarField,
    SampledVectorField,
    SweepRow,
    SweepTable,
)
from utils.errors import EmptyBaseError, InvalidArgumentError, UndefinedMeasureError
from utils.helpers import format_float

from .eigensolver import maximize_measure, minimize_constrained_sso
from .operators import DEFAULT_THRESHOLD, assemble_io, assemble_sso, normalized_base
from .roi import full_plane, plane_spacing, plane_weights, roi_center, volume, with_radius

logger = logging.getLogger(__name__)

PHASE_FLOOR = 1e-6
BAND_FRACTION = 1e-3


def superpose(basis: BeamBasis, coefficients: np.ndarray, z: Optional[float] = None) -> SampledField:
    """
    Field of sum_i a_i u_i on the primary target plane or the plane at `z`.

    Args:
        basis: Beam basis
        coefficients: N complex coefficients
        z: Plane coordinate, defaults to the primary target plane

    Returns:
        Superposed scalar or vector field
    """
    a = np.asarray(coefficients, dtype=np.complex128)
    if a.shape != (basis.size,):
        raise InvalidArgumentError(f"Expected {basis.size} coefficients, got shape {a.shape}")
    group = basis.members if z is None else basis.plane(z)
    first = group[0]
    if basis.is_vector:
        E = np.tensordot(a, np.stack([m.E for m in group]), axes=1)
        H = np.tensordot(a, np.stack([m.H for m in group]), axes=1)
        return SampledVectorField(grid=first.grid, E=E, H=H, k0=first.k0)
    values = np.tensordot(a, np.stack([m.values for m in group]), axes=1)
    return first.with_values(values)


def _planes_of(field: Union[SampledField, Sequence[SampledField]]) -> List[SampledField]:
    return [field] if isinstance(field, (SampledScalarField, SampledVectorField)) else list(field)


def soim(
    field: Union[SampledField, Sequence[SampledField]],
    roi: RegionOfInterest,
    r0: Optional[Sequence[float]] = None,
) -> float:
    """
    Second-order intensity moment w = 2 sqrt(m2 / m0) inside the region.

    Intensity is |u|^2 for scalar fields and the z flux Re(E* x H)_z for
    vector fields. Volumes take one field per plane of the region.

    Args:
        field: Field, or fields on every plane of a volumetric region
        roi: Region of interest
        r0: Kernel center, defaults to the ROI center

    Returns:
        Spot size w
    """
    planes = _planes_of(field)
    center = tuple(r0) if r0 is not None else roi_center(roi)
    grid = planes[0].grid
    weights = plane_weights(roi, grid)

    if roi.is_volume:
        if len(planes) != len(roi.z_planes):
            raise InvalidArgumentError(f"Volume ROI has {len(roi.z_planes)} planes, got {len(planes)} fields")
        if len(center) == 2:
            center = center + (roi.z_center,)
        dz = plane_spacing(roi)
    else:
        dz = np.ones(1)

    X, Y = grid.mesh()
    m0 = m2 = 0.0
    for plane, step in zip(planes, dz):
        kernel = (X - center[0]) ** 2 + (Y - center[1]) ** 2
        if roi.is_volume:
            kernel = kernel + (plane.grid.z - center[2]) ** 2
        intensity = plane.intensity * weights * step
        m0 += float(np.sum(intensity))
        m2 += float(np.sum(intensity * kernel))

    if not m0 > 0:
        raise UndefinedMeasureError(f"Zero intensity inside {roi.describe()}")
    return float(2 * np.sqrt(max(m2, 0.0) / m0))


def strehl(coefficients: Union[OptimizationReport, np.ndarray], M0: MeasureMatrix) -> float:
    """
    Intensity Strehl ratio of a superposition.

    ROI intensity of the unit-norm coefficient vector divided by the largest
    achievable ROI intensity (top eigenvalue of M0).
    """
    a = coefficients.coefficients if isinstance(coefficients, OptimizationReport) else np.asarray(coefficients)
    lam_max, _ = maximize_measure(M0)
    if not lam_max > 0:
        raise UndefinedMeasureError("IO matrix has no positive eigenvalue")
    norm_sq = float(np.real(np.vdot(a, a)))
    if norm_sq == 0:
        raise InvalidArgumentError("Strehl ratio of a zero coefficient vector")
    return M0.value(a) / norm_sq / lam_max


def maximize_transmission(basis: BeamBasis, roi: RegionOfInterest) -> OptimizationReport:
    """
    Superposition carrying the largest intensity through the region.

    On a planar region T is the top IO eigenvalue, the ROI intensity of the
    unit-norm optimal superposition. A volume integrates over z as well, so
    there T is the top eigenvalue over the same volume integral taken across
    the whole plane. The plane-spanning intensity of the optimum is echoed
    as `plane_power`.
    """
    M0 = assemble_io(basis, roi)
    lam_max, v = maximize_measure(M0)
    whole = volume(full_plane(), roi.z_planes) if roi.is_volume else full_plane()
    total = assemble_io(basis, whole).value(v)
    if not total > 0:
        raise UndefinedMeasureError("Superposition carries no intensity on the grid")
    T = lam_max / total if roi.is_volume else lam_max
    field = superpose(basis, v)
    w = soim(field, roi) if not roi.is_volume else None
    logger.info("Transmission through %s with N=%d: T=%.6f", roi.describe(), basis.size, T)
    return OptimizationReport(
        coefficients=v,
        tag=MeasureTag.IO,
        eigenvalue=lam_max,
        transmittance=min(max(T, 0.0), 1.0 + 1e-9),
        strehl=1.0,
        spot_size=w,
        retained=basis.size,
        basis_size=basis.size,
        roi=roi.describe(),
        parameters={"plane_power": format_float(total)},
    )


def minimize_spot(
    basis: BeamBasis,
    roi: RegionOfInterest,
    r0: Optional[Sequence[float]] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> OptimizationReport:
    """
    Smallest second-moment spot at unit ROI intensity.

    Chains assemble_io, normalized_base, assemble_sso and
    minimize_constrained_sso.

    Args:
        basis: Scalar or vector basis
        roi: Planar or volumetric region
        r0: Kernel center, defaults to the ROI center
        threshold: Retention fraction tau

    Returns:
        OptimizationReport with w, K and the Strehl ratio
    """
    M0 = assemble_io(basis, roi)
    base = normalized_base(M0, threshold)
    M2 = assemble_sso(basis, roi, base, r0)
    lam_min, v = minimize_constrained_sso(M2, base)
    w = float(2 * np.sqrt(max(lam_min, 0.0)))
    ratio = min(strehl(v, M0), 1.0)
    logger.info(
        "Spot in %s: w=%.6g with K=%d of N=%d, Strehl=%.4f", roi.describe(), w, base.retained, basis.size, ratio
    )
    return OptimizationReport(
        coefficients=v,
        tag=MeasureTag.SSO,
        eigenvalue=lam_min,
        spot_size=w,
        strehl=ratio,
        retained=base.retained,
        basis_size=basis.size,
        roi=roi.describe(),
        threshold=threshold,
    )


def local_wavevector(
    field: SampledScalarField,
    center: Optional[Tuple[float, float]] = None,
    floor: float = PHASE_FLOOR,
) -> np.ndarray:
    """
    Radial derivative of the phase, d arg(u) / dr.

    The phase gradient is Im(conj(u) grad u) / |u|^2 with central-difference
    grad u, so no unwrapping is needed and a sign change of a real field
    carries no wavevector. A sample is evaluated only when it and its four
    stencil neighbours reach floor * peak intensity; border samples, the
    rest of the dark region and the center itself are NaN.
    """
    grid = field.grid
    u = field.values
    intensity = field.intensity
    bright = intensity >= floor * intensity.max()
    evaluated = np.zeros(grid.shape, dtype=bool)
    evaluated[1:-1, 1:-1] = (
        bright[1:-1, 1:-1] & bright[:-2, 1:-1] & bright[2:, 1:-1] & bright[1:-1, :-2] & bright[1:-1, 2:]
    )

    du_dy, du_dx = np.gradient(u, grid.dy, grid.dx)
    k_x = np.zeros(grid.shape)
    k_y = np.zeros(grid.shape)
    np.divide(np.imag(np.conj(u) * du_dx), intensity, out=k_x, where=evaluated)
    np.divide(np.imag(np.conj(u) * du_dy), intensity, out=k_y, where=evaluated)

    cx, cy = center if center is not None else (grid.x0, grid.y0)
    X, Y = grid.mesh()
    dx, dy = X - cx, Y - cy
    r = np.hypot(dx, dy)
    k_r = np.full(grid.shape, np.nan)
    np.divide(dx * k_x + dy * k_y, r, out=k_r, where=evaluated & (r > 0))
    return k_r


def radial_spectral_density(field: SampledScalarField) -> Tuple[np.ndarray, np.ndarray]:
    """
    Azimuthally averaged spatial power spectrum.

    Returns:
        (upper bin edges in k, mean spectral power per bin)
    """
    grid = field.grid
    power = np.abs(np.fft.fft2(field.values)) ** 2
    kx = 2 * np.pi * np.fft.fftfreq(grid.nx, d=grid.dx)
    ky = 2 * np.pi * np.fft.fftfreq(grid.ny, d=grid.dy)
    KX, KY = np.meshgrid(kx, ky, indexing="xy")
    dk = 2 * np.pi / max(grid.nx * grid.dx, grid.ny * grid.dy)
    bins = np.floor(np.hypot(KX, KY) / dk).astype(int).ravel()
    counts = np.bincount(bins)
    sums = np.bincount(bins, weights=power.ravel())
    density = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    edges = (np.arange(density.size) + 1) * dk
    return edges, density


def superoscillation_mask(
    field: SampledScalarField,
    band_fraction: float = BAND_FRACTION,
    center: Optional[Tuple[float, float]] = None,
    floor: float = PHASE_FLOOR,
) -> Tuple[np.ndarray, float]:
    """
    Samples whose local radial wavevector exceeds the field's spectral band.

    Args:
        field: Scalar field
        band_fraction: epsilon; the band edge is the largest radial frequency
            whose spectral density is at least epsilon times the peak
        center: Center for the radial derivative
        floor: Relative intensity floor for phase evaluation

    Returns:
        (boolean mask, k_band)
    """
    edges, density = radial_spectral_density(field)
    peak = density.max()
    if not peak > 0:
        return np.zeros(field.grid.shape, dtype=bool), 0.0
    significant = np.nonzero(density >= band_fraction * peak)[0]
    k_band = float(edges[significant[-1]])

    k_local = local_wavevector(field, center, floor)
    mask = np.zeros(field.grid.shape, dtype=bool)
    np.greater(np.abs(k_local), k_band, out=mask, where=~np.isnan(k_local))
    logger.debug("Super-oscillation: k_band=%g, %d masked samples", k_band, int(mask.sum()))
    return mask, k_band


def first_dark_radius(field: SampledField, center: Optional[Tuple[float, float]] = None) -> float:
    """
    Radius of the first minimum of the azimuthally averaged intensity.

    Refined by a parabola through the minimum bin and its neighbours.
    """
    grid = field.grid
    r, _ = grid.polar(center)
    dr = min(grid.dx, grid.dy)
    bins = np.rint(r / dr).astype(int).ravel()
    counts = np.bincount(bins)
    sums = np.bincount(bins, weights=np.asarray(field.intensity, dtype=np.float64).ravel())
    radii = np.bincount(bins, weights=r.ravel())
    valid = counts > 0
    profile = sums[valid] / counts[valid]
    rho = radii[valid] / counts[valid]

    for i in range(1, profile.size - 1):
        if profile[i] < profile[i - 1] and profile[i] <= profile[i + 1]:
            a, b, c = profile[i - 1], profile[i], profile[i + 1]
            curvature = a - 2 * b + c
            shift = 0.5 * (a - c) / curvature if curvature > 0 else 0.0
            return float(rho[i] + shift * (rho[i + 1] - rho[i - 1]) / 2)
    raise UndefinedMeasureError("Radial profile has no minimum inside the grid")


def _run(points: Sequence, evaluate: Callable, max_workers: int) -> list:
    if max_workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(evaluate, points))
    return [evaluate(p) for p in points]


def _mark_steps(rows: List[SweepRow]) -> List[SweepRow]:
    """Flag rows whose K is smaller than that of the next larger radius."""
    order = sorted(range(len(rows)), key=lambda i: rows[i].R, reverse=True)
    for previous, current in zip(order, order[1:]):
        if rows[current].K < rows[previous].K:
            rows[current] = rows[current].model_copy(update={"step": True})
    return rows


def sweep_roi_radius(
    basis: BeamBasis,
    roi: RegionOfInterest,
    radii: Sequence[float],
    threshold: float = DEFAULT_THRESHOLD,
    r0: Optional[Sequence[float]] = None,
    reference_w: Optional[float] = None,
    max_workers: int = 1,
) -> SweepTable:
    """
    Spot-size minimization for a series of disk radii.

    Rows keep the order of `radii`; radii at which no mode survives the
    threshold are skipped.
    """

    def evaluate(R: float) -> Optional[SweepRow]:
        try:
            report = minimize_spot(basis, with_radius(roi, R), r0, threshold)
        except EmptyBaseError as exc:
            logger.warning("Skipping R=%g: %s", R, exc)
            return None
        return SweepRow(R=R, N=basis.size, K=report.retained, w=report.spot_size, Strehl=report.strehl)

    rows = [row for row in _run(list(radii), evaluate, max_workers) if row is not None]
    return SweepTable(rows=_mark_steps(rows), reference_w=reference_w)


def sweep_mode_count(
    basis: BeamBasis,
    roi: RegionOfInterest,
    counts: Sequence[int],
    measure: MeasureTag = MeasureTag.IO,
    threshold: float = DEFAULT_THRESHOLD,
    max_workers: int = 1,
) -> SweepTable:
    """Transmission (IO) or spot-size (SSO) optimum using the first n members, for each n."""
    tag = MeasureTag(measure)
    if tag not in (MeasureTag.IO, MeasureTag.SSO):
        raise InvalidArgumentError(f"Mode-count sweeps support IO and SSO, got {tag.value}")
    for n in counts:
        if not 1 <= n <= basis.size:
            raise InvalidArgumentError(f"Mode count {n} outside 1..{basis.size}")

    def evaluate(n: int) -> SweepRow:
        subset = basis.subset(list(range(n)))
        if tag == MeasureTag.IO:
            report = maximize_transmission(subset, roi)
        else:
            report = minimize_spot(subset, roi, threshold=threshold)
        return SweepRow(
            R=roi.outer_extent,
            N=n,
            K=report.retained,
            w=report.spot_size if report.spot_size is not None else float("nan"),
            T=report.transmittance,
            Strehl=report.strehl,
        )

    return SweepTable(rows=_run(list(counts), evaluate, max_workers))
