"""Tests for grids, basis synthesis and propagation."""

import numpy as np
import pytest
from scipy import special

from models import BesselParameters, Polarization, SampledScalarField
from services import (
    airy_first_zero,
    angular_spectrum_propagate,
    assemble_io,
    embed_scalar_as_vector,
    evaluate_aperture_airy,
    evaluate_bessel_vector,
    evaluate_lg,
    fourier_lens,
    full_plane,
    lg_basis,
    make_grid,
    maxwell_residuals,
    polarization_weights,
    square_grid,
    theta_schedule,
)
from services.propagation import conjugate_grid
from utils.errors import InvalidArgumentError


def test_make_grid_coordinates():
    grid = make_grid(4, 3, 0.5, 1.0, center=(1.0, -2.0), z=3.0)
    assert grid.shape == (3, 4)
    np.testing.assert_allclose(grid.x, [0.25, 0.75, 1.25, 1.75])
    np.testing.assert_allclose(grid.y, [-3.0, -2.0, -1.0])
    assert grid.z == 3.0


@pytest.mark.parametrize("nx, dx", [(1, 0.1), (8, 0.0), (8, -1.0)])
def test_make_grid_rejects_degenerate(nx, dx):
    with pytest.raises(InvalidArgumentError):
        make_grid(nx, 8, dx, 0.1)


def test_lg_gram_matrix_is_identity(k0, grid):
    basis = lg_basis(6, 0, 1.0, k0, grid)
    gram = assemble_io(basis, full_plane()).entries
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-3)


def test_lg_with_charge_is_orthogonal_to_fundamental(k0, grid):
    u0 = evaluate_lg(0, 0, 1.0, k0, grid)
    u1 = evaluate_lg(0, 2, 1.0, k0, grid)
    overlap = np.sum(np.conj(u0.values) * u1.values) * grid.cell_area
    assert abs(overlap) < 1e-10
    assert u1.power() == pytest.approx(1.0, abs=1e-6)


def test_unnormalized_fundamental_has_unit_axis_amplitude(k0):
    grid = square_grid(65, 0.1)
    u = evaluate_lg(0, 0, 1.5, k0, grid, normalized=False)
    assert abs(u.values[32, 32]) == pytest.approx(1.0, rel=1e-12)


def test_lg_rejects_negative_radial_index(k0, grid):
    with pytest.raises(InvalidArgumentError):
        evaluate_lg(-1, 0, 1.0, k0, grid)


def test_propagation_is_linear(k0, grid, rng):
    fields = [evaluate_lg(P, 1, 1.0, k0, grid) for P in range(3)]
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    combined = fields[0].with_values(sum(c * f.values for c, f in zip(a, fields)))

    propagated = angular_spectrum_propagate(combined, 2.5)
    expected = sum(c * angular_spectrum_propagate(f, 2.5).values for c, f in zip(a, fields))
    assert propagated.grid.z == pytest.approx(2.5)
    assert np.linalg.norm(propagated.values - expected) <= 1e-12 * np.linalg.norm(expected)


def test_zero_distance_propagation_is_identity(k0, grid):
    u = evaluate_lg(1, 0, 1.0, k0, grid)
    out = angular_spectrum_propagate(u, 0.0)
    np.testing.assert_array_equal(out.values, u.values)


def test_propagation_conserves_power_of_paraxial_beam(k0, grid):
    u = evaluate_lg(0, 0, 1.0, k0, grid)
    out = angular_spectrum_propagate(u, 3.0)
    assert out.power() == pytest.approx(u.power(), rel=1e-6)


def test_bessel_intensity_is_z_invariant(k0, bessel_grid):
    near = evaluate_bessel_vector(0.1, 1, 1.0, 0.0, 1.0, k0, bessel_grid)
    far = evaluate_bessel_vector(0.1, 1, 1.0, 0.0, 1.0, k0, bessel_grid.at_z(7.3))
    np.testing.assert_allclose(
        np.sum(np.abs(far.E) ** 2, axis=0), np.sum(np.abs(near.E) ** 2, axis=0), rtol=1e-10, atol=1e-14
    )
    np.testing.assert_allclose(far.flux_density, near.flux_density, rtol=1e-10, atol=1e-14)


def test_bessel_rejects_grazing_cone(k0, bessel_grid):
    with pytest.raises(InvalidArgumentError):
        evaluate_bessel_vector(np.pi / 2, 0, 1.0, 0.0, 1.0, k0, bessel_grid)


def test_bessel_rejects_null_polarization(k0, bessel_grid):
    with pytest.raises(InvalidArgumentError):
        evaluate_bessel_vector(0.1, 0, 0.0, 0.0, 1.0, k0, bessel_grid)


@pytest.mark.parametrize("L", [0, 1, 2])
def test_maxwell_residuals_of_vector_bessel(k0, L):
    grid = square_grid(32, 0.05)
    residuals = maxwell_residuals(BesselParameters(theta=0.1, L=L), k0, grid)
    assert residuals["divergence"] < 1e-6
    assert residuals["curl"] < 1e-6


def test_vector_bessel_flux_is_forward(k0, bessel_grid):
    field = evaluate_bessel_vector(0.05, 0, 1.0, 0.0, 1.0, k0, bessel_grid)
    assert field.power() > 0


def test_axial_bessel_is_a_forward_plane_wave(k0, bessel_grid):
    field = evaluate_bessel_vector(0.0, 0, 1.0, 0.0, 1.0, k0, bessel_grid.at_z(0.3))
    carrier = np.exp(1j * k0 * 0.3)
    np.testing.assert_allclose(field.E[0], carrier, rtol=1e-12)
    np.testing.assert_allclose(field.H[1], carrier, rtol=1e-12)
    np.testing.assert_allclose(field.H[0], 0.0, atol=1e-14)
    np.testing.assert_allclose(field.flux_density, 1.0, rtol=1e-12)


@pytest.mark.parametrize("L", [0, 1, 3])
def test_vector_bessel_flux_is_forward_on_every_ring(k0, bessel_grid, L):
    field = evaluate_bessel_vector(0.1, L, 1.0, 0.0, 1.0, k0, bessel_grid)
    flux = field.flux_density
    transverse = np.abs(field.E[0]) ** 2
    bright = transverse > 0.05 * transverse.max()
    assert np.all(flux[bright] > 0)
    assert field.power() > 0


def test_polarization_presets():
    assert polarization_weights(Polarization.X) == (1.0, 0.0)
    alpha, beta = polarization_weights(Polarization.CIRCULAR_PLUS)
    assert abs(alpha) ** 2 + abs(beta) ** 2 == pytest.approx(1.0)
    assert beta / alpha == pytest.approx(1j)


def test_theta_schedule():
    np.testing.assert_allclose(theta_schedule(0.1, 3), [0.0, 0.05, 0.1])
    np.testing.assert_allclose(theta_schedule(0.1, 1), [0.1])
    with pytest.raises(InvalidArgumentError):
        theta_schedule(0.1, 0)


def test_embedded_scalar_flux_equals_intensity(k0, grid):
    u = evaluate_lg(0, 0, 1.0, k0, grid)
    vector = embed_scalar_as_vector(u)
    np.testing.assert_allclose(vector.flux_density, u.intensity, rtol=1e-14)


def test_fourier_lens_conserves_power(k0, grid):
    u = evaluate_lg(2, 1, 1.0, k0, grid)
    out = fourier_lens(u, 50.0)
    assert out.grid.z == pytest.approx(u.grid.z + 100.0)
    assert out.grid.dx == pytest.approx(50.0 / (grid.nx * grid.dx))
    assert out.power() == pytest.approx(u.power(), rel=1e-12)


def test_exact_airy_matches_lens_of_disk(k0):
    grid_in = square_grid(128, 1.0)
    disk = (grid_in.polar((0.0, 0.0))[0] ** 2 <= 16.0 ** 2).astype(complex)
    lensed = fourier_lens(SampledScalarField(grid=grid_in, values=disk, k0=k0), 500.0)
    exact = evaluate_aperture_airy(16.0, k0, 500.0, grid_in, lensed.grid, exact_aperture=True)
    np.testing.assert_allclose(exact.values, lensed.values, rtol=1e-12, atol=1e-15)


def test_analytic_airy_core_matches_sampled_aperture(k0):
    grid_in = square_grid(128, 1.0)
    grid_out = conjugate_grid(grid_in, k0, 500.0)
    analytic = evaluate_aperture_airy(16.0, k0, 500.0, None, grid_out)
    exact = evaluate_aperture_airy(16.0, k0, 500.0, grid_in, grid_out, exact_aperture=True)

    rho, _ = grid_out.polar((0.0, 0.0))
    core = rho < 0.5 * airy_first_zero(16.0, k0, 500.0)
    error = np.max(np.abs(exact.values[core] - analytic.values[core]))
    assert error < 0.03 * np.max(np.abs(analytic.values))


def test_airy_first_zero():
    assert airy_first_zero(2.0, 2 * np.pi, 10.0) == pytest.approx(special.jn_zeros(1, 1)[0] * 10.0 / (4 * np.pi))
