"""Hermitian eigendecomposition and the constrained spot-size eigenproblem."""

import logging
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from models import EigenSolution, MeasureMatrix, NormalizedBase
from utils.errors import EmptyBaseError, GridMismatchError, InvalidArgumentError

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12

MatrixLike = Union[MeasureMatrix, np.ndarray]


def _entries(M: MatrixLike) -> np.ndarray:
    A = M.entries if isinstance(M, MeasureMatrix) else np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"Expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("Matrix has non-finite entries")
    return A


def _fix_phase(V: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real positive."""
    V = V.copy()
    for k in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, k])))
        pivot = V[i, k]
        if pivot != 0:
            V[:, k] *= np.conj(pivot) / np.abs(pivot)
            V[i, k] = np.abs(V[i, k])
    return V


def _order(eigenvalues: np.ndarray, V: np.ndarray, tol: float) -> np.ndarray:
    """Descending order; near-equal eigenvalues ordered by the index of their largest component."""
    order = list(np.argsort(-eigenvalues, kind="stable"))
    scale = max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny) if eigenvalues.size else 1.0
    pivots = np.argmax(np.abs(V), axis=0)

    result = []
    group = [order[0]] if order else []
    for idx in order[1:]:
        if abs(eigenvalues[group[-1]] - eigenvalues[idx]) <= tol * scale:
            group.append(idx)
        else:
            result.extend(sorted(group, key=lambda j: pivots[j]))
            group = [idx]
    result.extend(sorted(group, key=lambda j: pivots[j]))
    return np.array(result, dtype=int)


def eig_hermitian(M: MatrixLike, degeneracy_tol: float = DEGENERACY_TOL) -> EigenSolution:
    """
    Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Output is deterministic: each eigenvector's largest component is real
    positive and eigenvalues equal within `degeneracy_tol` (relative) are
    ordered by the index of that component.

    Args:
        M: Hermitian matrix or MeasureMatrix
        degeneracy_tol: Relative tolerance for ties

    Returns:
        EigenSolution
    """
    A = _entries(M)
    A = (A + A.conj().T) / 2
    if A.shape[0] == 0:
        raise InvalidArgumentError("Cannot decompose an empty matrix")

    eigenvalues, V = linalg.eigh(A)
    V = _fix_phase(V)
    order = _order(eigenvalues, V, degeneracy_tol)
    eigenvalues, V = eigenvalues[order], V[:, order]

    residual = float(np.max(np.linalg.norm(A @ V - V * eigenvalues[None, :], axis=0)))
    logger.debug("eigh: N=%d, lambda in [%g, %g], residual %.3g", A.shape[0], eigenvalues[-1], eigenvalues[0], residual)

    tag = M.tag if isinstance(M, MeasureMatrix) else None
    roi = M.roi if isinstance(M, MeasureMatrix) else ""
    return EigenSolution(eigenvalues=eigenvalues, eigenvectors=V, residual_norm=residual, tag=tag, roi=roi)


def maximize_measure(M0: MatrixLike) -> Tuple[float, np.ndarray]:
    """Top eigenpair: the superposition that maximizes a*M0 a at unit |a|."""
    return eig_hermitian(M0).max_pair


def minimize_constrained_sso(M2: MatrixLike, base: NormalizedBase) -> Tuple[float, np.ndarray]:
    """
    Smallest spot-size eigenpair at unit ROI intensity.

    Args:
        M2: Spot-size matrix on the K retained modes of `base`
        base: Intensity-normalized base the matrix was built on

    Returns:
        (lambda_min, coefficients in the original N-member basis)
    """
    if base.retained == 0:
        raise EmptyBaseError("Normalized base retains no modes")
    A = _entries(M2)
    if A.shape[0] != base.retained:
        raise GridMismatchError(f"Spot-size matrix is {A.shape[0]}x{A.shape[0]} but the base retains {base.retained} modes")

    value, b = eig_hermitian(A).min_pair
    coefficients = base.transform @ b
    logger.debug("Constrained minimum m2=%g over K=%d modes", value, base.retained)
    return value, coefficients


def rayleigh_quotient(M: MatrixLike, a: np.ndarray) -> float:
    """a* M a / a* a."""
    A = _entries(M)
    a = np.asarray(a, dtype=np.complex128)
    return float(np.real(np.vdot(a, A @ a)) / np.real(np.vdot(a, a)))


def rayleigh_gradient(M: MatrixLike, a: np.ndarray) -> np.ndarray:
    """
    Gradient of the Rayleigh quotient.

    Returns:
        Complex vector whose real and imaginary parts are the partial
        derivatives with respect to Re(a) and Im(a)
    """
    A = _entries(M)
    a = np.asarray(a, dtype=np.complex128)
    norm_sq = np.real(np.vdot(a, a))
    return 2 * (A @ a - rayleigh_quotient(A, a) * a) / norm_sq
