"""Simulated dual-SLM bench: ring encoding, CCD capture and three-step phase retrieval."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models import (
    BasisKind,
    BeamBasis,
    CcdFrame,
    CcdParameters,
    Grid,
    LinearityCheck,
    RetrievalResult,
    RingParameters,
    SampledScalarField,
    SlmPattern,
    SweepTable,
)
from models.bench import SLM_LEVELS
from utils.errors import InvalidArgumentError

from .beams import square_grid
from .pipelines import first_dark_radius, soim, sweep_roi_radius
from .propagation import conjugate_grid, fourier_lens
from .roi import annulus, disk, planar_membership

logger = logging.getLogger(__name__)

# Reference phase steps 2*pi*k/3 and the matching numerator/denominator weights
THREE_STEP_SHIFTS = (0.0, 2 * np.pi / 3, 4 * np.pi / 3)
THREE_STEP_SS = (0.0, np.sqrt(3), -np.sqrt(3))
THREE_STEP_CS = (2.0, -1.0, -1.0)

VISIBILITY_FLOOR = 1e-6


def encode_slm(values: np.ndarray, grid: Grid) -> SlmPattern:
    """
    Quantize a complex modulation with |values| <= 1 to 8-bit channels.

    Amplitude a maps to round(255 a); phase phi to round(256 phi / 2 pi) mod 256.
    """
    values = np.asarray(values, dtype=np.complex128)
    amplitude = np.abs(values)
    if np.any(amplitude > 1 + 1e-12):
        raise InvalidArgumentError(f"SLM amplitude must not exceed 1, got {amplitude.max():.6g}")
    amp_levels = np.rint(np.clip(amplitude, 0, 1) * (SLM_LEVELS - 1)).astype(np.uint8)
    phase = np.mod(np.angle(values), 2 * np.pi)
    phase_levels = np.mod(np.rint(phase * SLM_LEVELS / (2 * np.pi)), SLM_LEVELS).astype(np.uint8)
    return SlmPattern(amplitude=amp_levels, phase=phase_levels, grid=grid)


def decode_slm(pattern: SlmPattern) -> Tuple[np.ndarray, np.ndarray]:
    """(amplitude, phase) modulation values of a pattern."""
    return pattern.amplitude_values, pattern.phase_values


def slm_field(pattern: SlmPattern, k0: float, scale: float = 1.0) -> SampledScalarField:
    """Field leaving the SLM pair, scale * a * exp(i phi)."""
    amplitude, phase = decode_slm(pattern)
    return SampledScalarField(grid=pattern.grid, values=scale * amplitude * np.exp(1j * phase), k0=k0)


def default_ring_radii(N: int, outer_radius: float) -> List[Tuple[float, float]]:
    """N equal-width rings tiling the disk of radius `outer_radius`, innermost first."""
    if N < 1:
        raise InvalidArgumentError(f"Ring count must be >= 1, got {N}")
    edges = np.linspace(0.0, outer_radius, N + 1)
    return [(float(edges[k]), float(edges[k + 1])) for k in range(N)]


def encode_ring_basis(
    N: int,
    radii: Optional[Sequence[Tuple[float, float]]],
    grid: Grid,
    k0: float,
    focal_length: float,
    outer_radius: Optional[float] = None,
) -> Tuple[BeamBasis, List[SlmPattern]]:
    """
    Annular amplitude masks with constant phase on the SLM plane.

    Each member is normalized to unit plane-spanning power; the matching
    pattern drives the ring at full amplitude.

    Args:
        N: Number of rings
        radii: (r_in, r_out) per ring, increasing and non-overlapping;
            defaults to `default_ring_radii(N, outer_radius)`
        grid: SLM grid
        k0: Vacuum wavenumber
        focal_length: Fourier lens focal length

    Returns:
        (basis on the SLM plane, SLM patterns)
    """
    if radii is None:
        if outer_radius is None:
            raise InvalidArgumentError("Ring radii or an outer radius are required")
        radii = default_ring_radii(N, outer_radius)
    radii = [(float(a), float(b)) for a, b in radii]
    if len(radii) != N:
        raise InvalidArgumentError(f"Expected {N} ring radii, got {len(radii)}")
    for k, (r_in, r_out) in enumerate(radii):
        if not (0 <= r_in < r_out):
            raise InvalidArgumentError(f"Ring {k} needs 0 <= r_in < r_out, got ({r_in}, {r_out})")
        if k and r_in < radii[k - 1][1]:
            raise InvalidArgumentError(f"Ring {k} overlaps ring {k - 1}")

    members, patterns = [], []
    for r_in, r_out in radii:
        mask = planar_membership(annulus(r_in, r_out), grid)
        count = int(mask.sum())
        if count == 0:
            raise InvalidArgumentError(f"Ring ({r_in}, {r_out}) contains no SLM pixel")
        members.append(SampledScalarField(grid=grid, values=mask / np.sqrt(count * grid.cell_area), k0=k0))
        patterns.append(encode_slm(mask.astype(np.complex128), grid))

    basis = BeamBasis(
        kind=BasisKind.SCALAR,
        members=members,
        parameters=[RingParameters(r_in=a, r_out=b, focal_length=focal_length) for a, b in radii],
    )
    logger.debug("Encoded %d rings out to r=%g", N, radii[-1][1])
    return basis, patterns


def reference_field(
    grid: Grid,
    roi_radius: float,
    curvature: float,
    amplitude: float = 1.0,
    waist: Optional[float] = None,
) -> np.ndarray:
    """
    Broad reference wave with quadratic phase curvature * (x^2 + y^2).

    The default waist is the larger of 3.2 * roi_radius (intensity within
    20% of uniform over the ROI) and the grid half-diagonal.
    """
    if waist is None:
        half_diagonal = 0.5 * np.hypot(grid.nx * grid.dx, grid.ny * grid.dy)
        waist = max(3.2 * roi_radius, half_diagonal)
    r, _ = grid.polar((0.0, 0.0))
    return amplitude * np.exp(-(r / waist) ** 2 + 1j * curvature * r ** 2)


def capture(field: SampledScalarField, params: CcdParameters) -> CcdFrame:
    """
    Record |u|^2 as counts.

    counts = gain * I * (1 + nonlinearity * gain * I / full_well), then
    optional Gaussian noise, the sensitivity floor (below -> 0) and the
    saturation clamp.
    """
    intensity = field.intensity
    counts = params.gain * intensity
    if params.nonlinearity:
        counts = counts * (1 + params.nonlinearity * counts / params.full_well)
    if params.noise_sigma > 0:
        rng = np.random.default_rng(params.seed)
        counts = counts + rng.normal(0.0, params.noise_sigma, size=counts.shape)
    counts = np.where(counts < params.floor, 0.0, counts)
    counts = np.clip(counts, 0.0, params.saturation)
    return CcdFrame(
        counts=counts, grid=field.grid, floor=params.floor, saturation=params.saturation, gain=params.gain
    )


def interference_frames(
    field: SampledScalarField,
    reference: np.ndarray,
    params: CcdParameters,
) -> List[CcdFrame]:
    """Three captures of field + reference * exp(i phi_k)."""
    return [
        capture(field.with_values(field.values + reference * np.exp(1j * shift)), params)
        for shift in THREE_STEP_SHIFTS
    ]


def three_step_retrieve(
    frames: Sequence[CcdFrame],
    reference: np.ndarray,
    visibility_floor: float = VISIBILITY_FLOOR,
) -> RetrievalResult:
    """
    Three-step phase-shifting retrieval.

    With I_k = I_bg + gamma cos(dphi - phi_k) and phi_k = 2 pi k / 3:
    dphi = atan2(sqrt(3) (I1 - I2), 2 I0 - I1 - I2),
    gamma = (2/3) sqrt(S^2 + C^2), I_bg = mean(I_k), A = gamma / (2 |R|).

    Args:
        frames: Captures at the three reference phase steps
        reference: Complex reference field on the CCD grid
        visibility_floor: gamma below floor * max(gamma) marks a pixel unretrievable

    Returns:
        RetrievalResult with the phase relative to the reference
    """
    if len(frames) != 3:
        raise InvalidArgumentError(f"Three-step retrieval needs 3 frames, got {len(frames)}")
    grid = frames[0].grid
    for frame in frames[1:]:
        if not frame.grid.same_geometry(grid):
            raise InvalidArgumentError("Frames were captured on different grids")

    intensities = [frame.intensity for frame in frames]
    S = 0.5 * sum(s * I for s, I in zip(THREE_STEP_SS, intensities))
    C = 0.5 * sum(c * I for c, I in zip(THREE_STEP_CS, intensities))
    gamma = (2.0 / 3.0) * np.hypot(S, C)
    background = np.mean(intensities, axis=0)

    ref_amplitude = np.abs(reference)
    peak = gamma.max()
    valid = (gamma > visibility_floor * peak) & (ref_amplitude > 0) if peak > 0 else np.zeros(grid.shape, bool)

    phase = np.where(valid, np.mod(np.arctan2(S, C), 2 * np.pi), np.nan)
    amplitude = np.full(grid.shape, np.nan)
    np.divide(gamma, 2 * ref_amplitude, out=amplitude, where=valid)

    invalid = int(valid.size - valid.sum())
    if invalid:
        logger.warning("%d of %d pixels unretrievable (visibility below floor)", invalid, valid.size)
    return RetrievalResult(
        phase=phase, amplitude=amplitude, background=background, visibility=gamma, valid=valid, grid=grid
    )


class BenchSimulator:
    """
    Dual-SLM bench: SLM encoding, Fourier lens, reference arm and CCD.

    Basis fields are measured by three-step interferometry against a common
    reference, whose phase then cancels from every overlap integral.
    """

    def __init__(
        self,
        slm_grid: Grid,
        k0: float,
        focal_length: float,
        ccd: Optional[CcdParameters] = None,
        quantize: bool = True,
        reference_radius: Optional[float] = None,
        reference_curvature: Optional[float] = None,
        visibility_floor: float = VISIBILITY_FLOOR,
    ):
        """
        Initialize the bench.

        Args:
            slm_grid: SLM pixel grid
            k0: Vacuum wavenumber
            focal_length: Fourier lens focal length
            ccd: Detector response, ideal by default
            quantize: Apply 8-bit SLM quantization
            reference_radius: Largest ROI radius the reference must cover
            reference_curvature: Quadratic reference phase coefficient
        """
        self.slm_grid = slm_grid
        self.k0 = k0
        self.focal_length = focal_length
        self.ccd = ccd or CcdParameters()
        self.quantize = quantize
        self.visibility_floor = visibility_floor
        self.ccd_grid = conjugate_grid(slm_grid, k0, focal_length)

        radius = reference_radius if reference_radius is not None else 16 * self.ccd_grid.dx
        curvature = reference_curvature if reference_curvature is not None else np.pi / (4 * radius ** 2)
        self.reference_shape = reference_field(self.ccd_grid, radius, curvature)

    def display(self, values: np.ndarray) -> Tuple[Optional[SlmPattern], SampledScalarField]:
        """Modulation the SLM pair actually produces for `values`."""
        values = np.asarray(values, dtype=np.complex128)
        if not self.quantize:
            return None, SampledScalarField(grid=self.slm_grid, values=values, k0=self.k0)
        scale = float(np.abs(values).max())
        if scale == 0:
            return None, SampledScalarField(grid=self.slm_grid, values=values, k0=self.k0)
        pattern = encode_slm(values / scale, self.slm_grid)
        return pattern, slm_field(pattern, self.k0, scale)

    def propagate(self, values: np.ndarray) -> SampledScalarField:
        """SLM modulation -> CCD-plane field."""
        _, field = self.display(values)
        return fourier_lens(field, self.focal_length)

    def reference_for(self, field: SampledScalarField) -> np.ndarray:
        """Reference scaled to the peak amplitude of `field` for full fringe contrast."""
        peak = float(np.abs(field.values).max())
        return self.reference_shape * (peak if peak > 0 else 1.0)

    def measure_field(self, values: np.ndarray) -> RetrievalResult:
        """Encode, propagate, capture three interferograms and retrieve."""
        field = self.propagate(values)
        reference = self.reference_for(field)
        frames = interference_frames(field, reference, self.ccd)
        return three_step_retrieve(frames, reference, self.visibility_floor)

    def measure_basis(self, basis: BeamBasis) -> List[RetrievalResult]:
        """Retrieve every member of an SLM-plane basis on the CCD plane."""
        return [self.measure_field(member.values) for member in basis.members]

    def measured_basis(self, basis: BeamBasis, results: Optional[List[RetrievalResult]] = None) -> BeamBasis:
        """CCD-plane basis built from retrieved fields (reference phase removed)."""
        results = results if results is not None else self.measure_basis(basis)
        members = [SampledScalarField(grid=self.ccd_grid, values=r.field(), k0=self.k0) for r in results]
        return BeamBasis(kind=BasisKind.SCALAR, members=members, parameters=basis.parameters)

    def true_basis(self, basis: BeamBasis) -> BeamBasis:
        """CCD-plane basis from exact propagation, without SLM or CCD effects."""
        members = [fourier_lens(member, self.focal_length) for member in basis.members]
        return BeamBasis(kind=BasisKind.SCALAR, members=members, parameters=basis.parameters)

    def exp_s(self, basis: BeamBasis, coefficients: np.ndarray) -> np.ndarray:
        """Intensity of the encoded superposition recorded through the bench."""
        values = np.tensordot(np.asarray(coefficients, dtype=np.complex128), np.stack([m.values for m in basis.members]), axes=1)
        return capture(self.propagate(values), self.ccd).intensity

    @staticmethod
    def num_s(results: Sequence[RetrievalResult], coefficients: np.ndarray) -> np.ndarray:
        """|sum a_i E_i|^2 from individually retrieved fields."""
        fields = np.stack([r.field() for r in results])
        return np.abs(np.tensordot(np.asarray(coefficients, dtype=np.complex128), fields, axes=1)) ** 2

    def verify_linearity(
        self,
        basis: BeamBasis,
        coefficients: np.ndarray,
        results: Optional[List[RetrievalResult]] = None,
        tolerance: float = 0.02,
    ) -> LinearityCheck:
        """
        Compare Exp-S with Num-S.

        The relative L2 difference is taken over pixels retrievable in every
        measured field.
        """
        results = results if results is not None else self.measure_basis(basis)
        exp_s = self.exp_s(basis, coefficients)
        num_s = self.num_s(results, coefficients)
        valid = np.logical_and.reduce([r.valid for r in results])
        reference = np.linalg.norm(num_s[valid])
        if reference == 0:
            raise InvalidArgumentError("Num-S vanishes on every retrievable pixel")
        discrepancy = float(np.linalg.norm((exp_s - num_s)[valid]) / reference)
        level = logging.INFO if discrepancy <= tolerance else logging.WARNING
        logger.log(level, "Exp-S vs Num-S discrepancy %.3g (tolerance %.3g)", discrepancy, tolerance)
        return LinearityCheck(discrepancy=discrepancy, exp_s=exp_s, num_s=num_s, tolerance=tolerance)

    def reference_spot(self, basis: BeamBasis) -> Tuple[float, float]:
        """(R_B, w_B): first dark radius and core SOIM of the outermost ring's beam."""
        outer = fourier_lens(basis.members[-1], self.focal_length)
        R_B = first_dark_radius(outer, (0.0, 0.0))
        return R_B, soim(outer, disk(R_B))

    def spot_size_sweep(
        self,
        basis: BeamBasis,
        radii: Sequence[float],
        threshold: float,
        results: Optional[List[RetrievalResult]] = None,
        max_workers: int = 1,
    ) -> SweepTable:
        """Spot-size minimization on measured fields for each CCD-plane ROI radius, with w_B attached."""
        measured = self.measured_basis(basis, results)
        _, w_B = self.reference_spot(basis)
        return sweep_roi_radius(
            measured, disk(float(radii[0])), radii, threshold, reference_w=w_B, max_workers=max_workers
        )
