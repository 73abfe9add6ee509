"""Assembly of Hermitian measure matrices on a basis subspace."""

import hashlib
import json
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from models import (
    BeamBasis,
    MeasureMatrix,
    MeasureTag,
    NormalizedBase,
    RegionOfInterest,
    SampledVectorField,
)
from utils.errors import EmptyBaseError, GridMismatchError, InvalidArgumentError, UnsupportedKernelError

from .beams import EPSILON_0, MU_0
from .eigensolver import eig_hermitian
from .roi import plane_spacing, plane_weights, roi_center

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-3
ASYMMETRY_WARNING = 1e-10

# One quadrature slice: basis fields on a plane and their weights
Slice = Tuple[list, np.ndarray]


def basis_fingerprint(basis: BeamBasis) -> str:
    """sha256 over the member samples, plane grids and generation parameters."""
    digest = hashlib.sha256()
    digest.update(str(basis.kind).encode())
    for group in [basis.initial_members] + basis.planes():
        for member in group:
            digest.update(member.grid.model_dump_json().encode())
            arrays = (member.values,) if not basis.is_vector else (member.E, member.H)
            for array in arrays:
                digest.update(np.ascontiguousarray(array, dtype="<c16").tobytes())
    digest.update(json.dumps([p.model_dump(mode="json") for p in basis.parameters], sort_keys=True).encode())
    return digest.hexdigest()


def raw_asymmetry(A: np.ndarray) -> float:
    """max|A - A^H| / |A|_2 before symmetrization."""
    norm = np.linalg.norm(A, 2) if A.size else 0.0
    if norm == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)) / norm)


def symmetrize(A: np.ndarray) -> np.ndarray:
    """(A + A^H) / 2, exactly Hermitian."""
    return (A + A.conj().T) / 2


def _overlap(f: np.ndarray, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """[i, j] = sum conj(f_i) g_j w over the samples."""
    n = f.shape[0]
    return (np.conj(f) * w).reshape(n, -1) @ g.reshape(n, -1).T


def _slices(basis: BeamBasis, roi: RegionOfInterest) -> List[Slice]:
    if roi.is_volume:
        weights = plane_weights(roi, basis.grid)
        return [(basis.plane(z), weights * dz) for z, dz in zip(roi.z_planes, plane_spacing(roi))]
    return [(basis.members, plane_weights(roi, basis.grid))]


def _stack(group: list, attr: str) -> np.ndarray:
    return np.stack([getattr(member, attr) for member in group])


def _flux_overlap(group: list, w: np.ndarray) -> np.ndarray:
    """1/2 [(E_i* x H_j) + (E_j x H_i*)] . e_z summed with weights w."""
    E, H = _stack(group, "E"), _stack(group, "H")
    Ex, Ey, Hx, Hy = E[:, 0], E[:, 1], H[:, 0], H[:, 1]
    return 0.5 * (_overlap(Ex, Hy, w) - _overlap(Ey, Hx, w) + _overlap(Hy, Ex, w) - _overlap(Hx, Ey, w))


def _intensity_overlap(basis: BeamBasis, group: list, w: np.ndarray) -> np.ndarray:
    if basis.is_vector:
        return _flux_overlap(group, w)
    U = _stack(group, "values")
    return _overlap(U, U, w)


def _measure(tag: MeasureTag, raw: np.ndarray, roi: RegionOfInterest, fingerprint: str, normalized=False) -> MeasureMatrix:
    asymmetry = raw_asymmetry(raw)
    if asymmetry > ASYMMETRY_WARNING:
        logger.warning("%s raw asymmetry %.3g exceeds %.0e", MeasureTag(tag).value, asymmetry, ASYMMETRY_WARNING)
    return MeasureMatrix(
        entries=symmetrize(raw),
        tag=tag,
        roi=roi.describe(),
        basis_hash=fingerprint,
        normalized=normalized,
    )


def assemble_io(basis: BeamBasis, roi: RegionOfInterest) -> MeasureMatrix:
    """
    Intensity matrix M0 over the region.

    Scalar bases use int u_i* u_j dS. Vector bases use the Hermitian flux
    pairing 1/2 int [(E_i* x H_j) + (E_j x H_i*)] . e_z dS, so that a* M0 a
    is the flux of the superposition. Volumes integrate over the plane stack.
    """
    raw = sum(_intensity_overlap(basis, group, w) for group, w in _slices(basis, roi))
    logger.debug("IO assembled: N=%d over %s", basis.size, roi.describe())
    return _measure(MeasureTag.IO, raw, roi, basis_fingerprint(basis))


def normalized_base(M0: MeasureMatrix, threshold: float = DEFAULT_THRESHOLD) -> NormalizedBase:
    """
    Intensity-normalized base of the significant IO eigenmodes.

    Modes with lambda_k >= threshold * sum(lambda) (and lambda_k > 0) are
    kept; transform column k is v_k / sqrt(lambda_k).

    Args:
        M0: IO matrix
        threshold: Retention fraction tau, 0 <= tau < 1

    Returns:
        NormalizedBase
    """
    if MeasureTag(M0.tag) != MeasureTag.IO:
        raise InvalidArgumentError(f"Normalized base needs an IO matrix, got {M0.tag}")
    if not (0 <= threshold < 1):
        raise InvalidArgumentError(f"Threshold must lie in [0, 1), got {threshold}")

    solution = eig_hermitian(M0)
    eigenvalues, V = solution.eigenvalues, solution.eigenvectors
    total = float(np.sum(eigenvalues))
    keep = (eigenvalues >= threshold * total) & (eigenvalues > 0)
    if not np.any(keep):
        raise EmptyBaseError(f"No intensity eigenmode reaches {threshold:g} of the total {total:g}")

    retained, vectors = eigenvalues[keep], V[:, keep]
    logger.debug("Normalized base: K=%d of N=%d at tau=%g", retained.size, eigenvalues.size, threshold)
    return NormalizedBase(
        transform=vectors / np.sqrt(retained)[None, :],
        eigenvalues=retained,
        eigenvectors=vectors,
        threshold=threshold,
        total_intensity=total,
        basis_hash=M0.basis_hash,
        roi=M0.roi,
    )


def _radial_kernel(grid, center: Sequence[float], z: Optional[float]) -> np.ndarray:
    X, Y = grid.mesh()
    kernel = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    if len(center) == 3 and z is not None:
        kernel = kernel + (z - center[2]) ** 2
    return kernel


def assemble_sso(
    basis: BeamBasis,
    roi: RegionOfInterest,
    base: NormalizedBase,
    r0: Optional[Sequence[float]] = None,
) -> MeasureMatrix:
    """
    Spot-size matrix M2 in the normalized base.

    The kernel |r - r0|^2 weights the intensity overlap (scalar) or the flux
    pairing (vector). For volumes r0 carries a z coordinate and the kernel
    includes (z - z0)^2.

    Args:
        basis: Basis the base was built from
        roi: Region the base was built on
        base: Intensity-normalized base
        r0: Kernel center, defaults to the ROI center

    Returns:
        K x K MeasureMatrix flagged as normalized
    """
    fingerprint = basis_fingerprint(basis)
    if base.size != basis.size or base.basis_hash != fingerprint or base.roi != roi.describe():
        raise GridMismatchError("Normalized base was built from a different basis or ROI")

    center = tuple(r0) if r0 is not None else roi_center(roi)
    if roi.is_volume and len(center) == 2:
        center = center + (roi.z_center,)

    raw = 0
    for group, w in _slices(basis, roi):
        kernel = _radial_kernel(basis.grid, center, group[0].grid.z if roi.is_volume else None)
        raw = raw + _intensity_overlap(basis, group, w * kernel)

    T = base.transform
    projected = T.conj().T @ symmetrize(raw) @ T
    logger.debug("SSO assembled: K=%d about r0=%s", base.retained, center)
    return _measure(MeasureTag.SSO, projected, roi, fingerprint, normalized=True)


def _require_vector(basis: BeamBasis, what: str) -> None:
    if not basis.is_vector:
        raise UnsupportedKernelError(f"{what} needs a vector basis, got {basis.kind}")


def assemble_local_kernel(basis: BeamBasis, roi: RegionOfInterest, kernel: Union[MeasureTag, str]) -> MeasureMatrix:
    """
    Pointwise-kernel measures of the combined field.

    EO: 1/2 int (eps0 E_i* . E_j + mu0 H_i* . H_j) dS.
    CSO: i/2 sqrt(eps0 mu0) int (E_i* . H_j - H_i* . E_j) dS.
    """
    try:
        tag = MeasureTag(kernel)
    except ValueError:
        raise UnsupportedKernelError(f"Unsupported kernel: {kernel}")
    if tag not in (MeasureTag.EO, MeasureTag.CSO):
        raise UnsupportedKernelError(f"Unsupported kernel: {kernel}")
    _require_vector(basis, f"{tag.value} kernel")

    raw = 0
    for group, w in _slices(basis, roi):
        E, H = _stack(group, "E"), _stack(group, "H")
        if tag == MeasureTag.EO:
            term = sum(EPSILON_0 * _overlap(E[:, c], E[:, c], w) + MU_0 * _overlap(H[:, c], H[:, c], w) for c in range(3))
            raw = raw + 0.5 * term
        else:
            term = sum(_overlap(E[:, c], H[:, c], w) - _overlap(H[:, c], E[:, c], w) for c in range(3))
            raw = raw + 0.5j * np.sqrt(EPSILON_0 * MU_0) * term
    return _measure(tag, raw, roi, basis_fingerprint(basis))


def _force_plane(group: list, w: np.ndarray, normal: float) -> List[np.ndarray]:
    """Raw force matrices (x, y, z) of one plane with outward normal normal*e_z."""
    E, H = _stack(group, "E"), _stack(group, "H")
    Ez, Hz = E[:, 2], H[:, 2]
    density = sum(EPSILON_0 * _overlap(E[:, c], E[:, c], w) + MU_0 * _overlap(H[:, c], H[:, c], w) for c in range(3))
    matrices = []
    for a in range(3):
        term = (
            EPSILON_0 * (_overlap(Ez, E[:, a], w) + _overlap(E[:, a], Ez, w))
            + MU_0 * (_overlap(Hz, H[:, a], w) + _overlap(H[:, a], Hz, w))
        )
        if a == 2:
            term = term - density
        matrices.append(0.25 * normal * term)
    return matrices


def assemble_force(basis: BeamBasis, roi: RegionOfInterest) -> Tuple[MeasureMatrix, MeasureMatrix, MeasureMatrix]:
    """
    Momentum-flux (Maxwell stress) matrices through a bracketing plane pair.

    The first and last planes of `roi` act as the closed surface with
    outward normals -e_z and +e_z; lateral flux is neglected.

    Returns:
        (OFO_x, OFO_y, OFO_z)
    """
    _require_vector(basis, "Force operator")
    if not roi.is_volume:
        raise InvalidArgumentError(f"Force operator needs a plane pair, got {roi.describe()}")

    weights = plane_weights(roi, basis.grid)
    lower = _force_plane(basis.plane(roi.z_planes[0]), weights, -1.0)
    upper = _force_plane(basis.plane(roi.z_planes[-1]), weights, +1.0)
    fingerprint = basis_fingerprint(basis)
    tags = (MeasureTag.OFO_X, MeasureTag.OFO_Y, MeasureTag.OFO_Z)
    return tuple(_measure(tag, lo + up, roi, fingerprint) for tag, lo, up in zip(tags, lower, upper))


def stress_force_density(field: SampledVectorField, normal: float) -> np.ndarray:
    """Time-averaged T . n per sample, shape (3, ny, nx), for n = normal*e_z."""
    E, H = field.E, field.H
    energy = 0.5 * (EPSILON_0 * np.sum(np.abs(E) ** 2, axis=0) + MU_0 * np.sum(np.abs(H) ** 2, axis=0))
    rows = []
    for a in range(3):
        t = 0.5 * np.real(EPSILON_0 * E[a] * np.conj(E[2]) + MU_0 * H[a] * np.conj(H[2]))
        if a == 2:
            t = t - 0.5 * energy
        rows.append(normal * t)
    return np.stack(rows)


def pointwise_stress_force(
    lower: SampledVectorField,
    upper: SampledVectorField,
    roi: RegionOfInterest,
) -> np.ndarray:
    """Force on the plane pair from the stress tensor of single superposed fields."""
    weights = plane_weights(roi, lower.grid)
    force = np.zeros(3)
    for field, normal in ((lower, -1.0), (upper, +1.0)):
        force += np.sum(stress_force_density(field, normal) * weights[None], axis=(1, 2))
    return force


def measure_value(M: MeasureMatrix, coefficients: np.ndarray) -> float:
    """a* M a of a coefficient vector."""
    return M.value(coefficients)


def assemble(
    basis: BeamBasis,
    roi: RegionOfInterest,
    tag: Union[MeasureTag, str],
    threshold: float = DEFAULT_THRESHOLD,
) -> List[MeasureMatrix]:
    """Assemble any supported measure by tag; SSO goes through the normalized base."""
    tag = MeasureTag(tag)
    if tag == MeasureTag.IO:
        return [assemble_io(basis, roi)]
    if tag == MeasureTag.SSO:
        base = normalized_base(assemble_io(basis, roi), threshold)
        return [assemble_sso(basis, roi, base)]
    if tag in (MeasureTag.EO, MeasureTag.CSO):
        return [assemble_local_kernel(basis, roi, tag)]
    return list(assemble_force(basis, roi))
