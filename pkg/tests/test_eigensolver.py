"""Tests for the Hermitian eigensolver and the constrained spot-size problem."""

import numpy as np
import pytest

from models import MeasureMatrix, NormalizedBase
from services import (
    assemble_io,
    assemble_sso,
    disk,
    eig_hermitian,
    lg_basis,
    maximize_measure,
    minimize_constrained_sso,
    normalized_base,
    rayleigh_gradient,
    rayleigh_quotient,
    soim,
    superpose,
)
from utils.errors import EmptyBaseError, GridMismatchError, InvalidArgumentError


def _random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_diagonal_eigenvalues_descend():
    solution = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(solution.eigenvalues, [3.0, 2.0, 1.0])
    np.testing.assert_allclose(np.abs(solution.eigenvectors), np.eye(3)[:, [0, 2, 1]])
    assert solution.residual_norm < 1e-12


def test_degenerate_eigenvalues_ordered_by_pivot():
    solution = eig_hermitian(np.eye(3))
    np.testing.assert_array_equal(solution.eigenvectors, np.eye(3))


def test_pivot_component_is_real_positive(rng):
    solution = eig_hermitian(_random_hermitian(rng, 6))
    V = solution.eigenvectors
    for k in range(6):
        pivot = V[np.argmax(np.abs(V[:, k])), k]
        assert pivot.imag == 0.0
        assert pivot.real > 0


def test_decomposition_reconstructs_matrix(rng):
    A = _random_hermitian(rng, 5)
    solution = eig_hermitian(A)
    V, lam = solution.eigenvectors, solution.eigenvalues
    np.testing.assert_allclose(V @ np.diag(lam) @ V.conj().T, A, atol=1e-12)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(5), atol=1e-12)


def test_measure_matrix_metadata_propagates():
    M = MeasureMatrix(entries=np.diag([1.0, 2.0]), tag="SSO", roi="disk:R=1.0,cx=0.0,cy=0.0")
    solution = eig_hermitian(M)
    assert solution.tag == "SSO"
    assert solution.roi == M.roi
    assert solution.max_pair[0] == pytest.approx(2.0)
    assert solution.min_pair[0] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "matrix",
    [np.zeros((2, 3)), np.array([[1.0, np.nan], [np.nan, 1.0]]), np.zeros((0, 0))],
)
def test_invalid_matrices(matrix):
    with pytest.raises(InvalidArgumentError):
        eig_hermitian(matrix)


def test_rayleigh_gradient_vanishes_at_eigenvectors(rng):
    A = _random_hermitian(rng, 4)
    solution = eig_hermitian(A)
    for k in range(4):
        v = solution.eigenvectors[:, k]
        assert np.linalg.norm(rayleigh_gradient(A, v)) < 1e-10
        assert rayleigh_quotient(A, v) == pytest.approx(solution.eigenvalues[k], abs=1e-12)


def test_rayleigh_gradient_matches_finite_differences(rng):
    A = _random_hermitian(rng, 3)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    gradient = rayleigh_gradient(A, a)
    h = 1e-6
    for i in range(3):
        step = np.zeros(3, dtype=complex)
        step[i] = h
        d_re = (rayleigh_quotient(A, a + step) - rayleigh_quotient(A, a - step)) / (2 * h)
        d_im = (rayleigh_quotient(A, a + 1j * step) - rayleigh_quotient(A, a - 1j * step)) / (2 * h)
        assert gradient[i].real == pytest.approx(d_re, abs=1e-6)
        assert gradient[i].imag == pytest.approx(d_im, abs=1e-6)


def test_rayleigh_quotient_is_scale_invariant(rng):
    A = _random_hermitian(rng, 4)
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert rayleigh_quotient(A, (2.5 - 1j) * a) == pytest.approx(rayleigh_quotient(A, a), rel=1e-12)


def test_maximize_measure_returns_top_pair():
    value, vector = maximize_measure(np.diag([1.0, 4.0, 2.0]))
    assert value == pytest.approx(4.0)
    np.testing.assert_allclose(vector, [0.0, 1.0, 0.0])


def _base(K, N=3):
    return NormalizedBase(
        transform=np.eye(N)[:, :K],
        eigenvalues=np.ones(K),
        eigenvectors=np.eye(N)[:, :K],
        threshold=1e-3,
        total_intensity=float(N),
    )


def test_constrained_minimum_maps_back_to_basis():
    value, coefficients = minimize_constrained_sso(np.diag([5.0, 2.0]), _base(2))
    assert value == pytest.approx(2.0)
    np.testing.assert_allclose(coefficients, [0.0, 1.0, 0.0])


def test_constrained_minimum_needs_modes():
    with pytest.raises(EmptyBaseError):
        minimize_constrained_sso(np.zeros((0, 0)), _base(0))


def test_constrained_minimum_size_mismatch():
    with pytest.raises(GridMismatchError):
        minimize_constrained_sso(np.eye(3), _base(2))


def test_single_retained_mode_gives_its_own_spot_size(k0, grid):
    basis = lg_basis(1, 0, 1.0, k0, grid)
    roi = disk(1.0)
    base = normalized_base(assemble_io(basis, roi))
    value, coefficients = minimize_constrained_sso(assemble_sso(basis, roi, base), base)
    assert base.retained == 1
    assert 2 * np.sqrt(value) == pytest.approx(soim(superpose(basis, coefficients), roi), rel=1e-10)


def test_constrained_minimum_is_a_lower_bound(lg4, rng):
    roi = disk(1.5)
    M0 = assemble_io(lg4, roi)
    base = normalized_base(M0)
    M2 = assemble_sso(lg4, roi, base)
    value, coefficients = minimize_constrained_sso(M2, base)

    # Unit ROI intensity at the optimum
    assert M0.value(coefficients) == pytest.approx(1.0, rel=1e-10)
    for _ in range(50):
        b = rng.normal(size=base.retained) + 1j * rng.normal(size=base.retained)
        assert rayleigh_quotient(M2, b) >= value * (1 - 1e-10)
