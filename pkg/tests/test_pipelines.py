"""Tests for the transmission and spot-size pipelines and the beam analyses."""

import numpy as np
import pytest
from scipy import special

from models import BasisKind, BeamBasis, MeasureTag, SampledScalarField
from services import (
    angular_spectrum_propagate,
    assemble_io,
    bessel_basis,
    disk,
    evaluate_aperture_airy,
    evaluate_lg,
    first_dark_radius,
    fourier_lens,
    full_plane,
    lg_basis,
    local_wavevector,
    maximize_transmission,
    minimize_spot,
    soim,
    square_grid,
    strehl,
    superoscillation_mask,
    superpose,
    sweep_mode_count,
    sweep_roi_radius,
    theta_schedule,
    volume,
)
from services.beams import airy_first_zero
from utils.errors import InvalidArgumentError, UndefinedMeasureError

GAUSSIAN_DISK_TRANSMITTANCE = 1 - np.exp(-2)


@pytest.fixture
def wide_grid():
    """+-8 lambda at lambda/20, enough for LG radial orders up to 14."""
    return square_grid(320, 0.05)


def test_superpose_checks_coefficient_count(lg4):
    with pytest.raises(InvalidArgumentError):
        superpose(lg4, np.ones(3))


def test_superpose_is_linear(lg4):
    field = superpose(lg4, np.array([1.0, 0.0, -2.0j, 0.0]))
    np.testing.assert_allclose(field.values, lg4.members[0].values - 2j * lg4.members[2].values)


def test_gaussian_transmission(k0, fine_grid):
    basis = lg_basis(1, 0, 1.0, k0, fine_grid)
    report = maximize_transmission(basis, disk(1.0))
    assert report.transmittance == pytest.approx(GAUSSIAN_DISK_TRANSMITTANCE, abs=1e-3)
    assert report.tag == "IO"
    assert report.strehl == 1.0
    assert report.retained == 1


@pytest.mark.slow
def test_transmission_grows_with_mode_count(k0, wide_grid):
    basis = lg_basis(15, 0, 1.0, k0, wide_grid)
    table = sweep_mode_count(basis, disk(1.0), range(1, 16))
    T = np.array([row.T for row in table.rows])
    assert [row.N for row in table.rows] == list(range(1, 16))
    assert np.all(np.diff(T) >= -1e-9)
    assert T[0] == pytest.approx(GAUSSIAN_DISK_TRANSMITTANCE, abs=2e-3)
    assert T[-1] >= 0.99


def test_transmission_grows_with_roi_radius(lg4):
    T = [maximize_transmission(lg4, disk(R)).transmittance for R in (0.5, 1.0, 1.5, 2.0)]
    assert np.all(np.diff(T) >= -1e-9)
    assert all(0 < t <= 1 + 1e-9 for t in T)


def test_transmission_through_volume(k0, grid):
    basis = lg_basis(3, 0, 1.0, k0, grid, z_planes=[-0.5, 0.5])
    report = maximize_transmission(basis, volume(disk(1.0), [-0.5, 0.0, 0.5]))
    assert 0 < report.transmittance <= 1 + 1e-9
    assert report.spot_size is None


def test_transmittance_is_the_top_eigenvalue(k0):
    # +-2 lambda truncates the members, so their plane-spanning intensity falls short of 1
    grid = square_grid(32, 0.125)
    basis = lg_basis(3, 0, 1.0, k0, grid)
    roi = disk(1.0)
    report = maximize_transmission(basis, roi)
    assert report.transmittance == report.eigenvalue
    assert report.transmittance == pytest.approx(assemble_io(basis, roi).value(report.coefficients), rel=1e-12)
    assert report.transmittance < float(report.parameters["plane_power"]) < 1


def test_gaussian_spot_size(k0, grid):
    field = evaluate_lg(0, 0, 1.0, k0, grid)
    assert soim(field, full_plane()) == pytest.approx(np.sqrt(2.0), rel=5e-3)


def test_gaussian_spot_spreads_by_root_two_over_a_rayleigh_range(k0):
    # w0 = 4 lambda keeps the nonparaxial correction well inside the tolerance
    w0 = 4.0
    waist = evaluate_lg(0, 0, w0, k0, square_grid(256, 0.2))
    spread = angular_spectrum_propagate(waist, k0 * w0 ** 2 / 2)
    ratio = soim(spread, full_plane()) / soim(waist, full_plane())
    assert ratio == pytest.approx(np.sqrt(2.0), rel=5e-3)


def test_airy_core_is_wider_than_bessel_core(k0):
    grid_out = square_grid(256, 0.5)
    airy = evaluate_aperture_airy(16.0, k0, 500.0, None, grid_out)
    inner = evaluate_aperture_airy(15.5, k0, 500.0, None, grid_out)
    ring = airy.with_values(airy.values - inner.values)

    w_A = soim(airy, disk(first_dark_radius(airy)))
    w_B = soim(ring, disk(first_dark_radius(ring)))
    assert w_A / w_B == pytest.approx(1.5, abs=0.1)


def test_spot_size_of_zero_field_is_undefined(grid, k0):
    field = SampledScalarField(grid=grid, values=np.zeros(grid.shape), k0=k0)
    with pytest.raises(UndefinedMeasureError):
        soim(field, disk(1.0))


def test_volume_spot_size_needs_every_plane(lg4):
    with pytest.raises(InvalidArgumentError):
        soim(lg4.members[0], volume(disk(1.0), [0.0, 1.0]))


def test_minimize_spot_report_is_consistent(lg4):
    roi = disk(1.5)
    report = minimize_spot(lg4, roi, threshold=1e-9)
    assert report.tag == "SSO"
    assert report.retained == 4
    assert report.spot_size == pytest.approx(soim(superpose(lg4, report.coefficients), roi), rel=1e-6)
    assert 0 < report.strehl <= 1
    # The fundamental mode lies in the span, so the optimum cannot be wider
    assert report.spot_size <= soim(lg4.members[0], roi) * (1 + 1e-9)


def test_spot_minimum_keeps_the_tight_gaussian(k0, grid):
    tight = evaluate_lg(0, 0, 0.5, k0, grid)
    wide = evaluate_lg(0, 0, 1.5, k0, grid, center=(6.0, 0.0))
    basis = BeamBasis(kind=BasisKind.SCALAR, members=[tight, wide])

    report = minimize_spot(basis, full_plane())
    a = report.coefficients
    assert abs(a[1]) < 1e-6 * abs(a[0])
    assert report.spot_size == pytest.approx(np.sqrt(2.0) * 0.5, rel=5e-3)


def test_strehl_of_top_eigenvector_is_one(lg4):
    M0 = assemble_io(lg4, disk(1.0))
    top = np.linalg.eigh(M0.entries)[1][:, -1]
    assert strehl(top, M0) == pytest.approx(1.0)
    assert strehl(3.0 * top, M0) == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        strehl(np.zeros(4), M0)


def test_volume_spot_minimization(k0, grid):
    planes = [-0.5, 0.0, 0.5]
    basis = lg_basis(3, 0, 1.0, k0, grid, z_planes=[-0.5, 0.5])
    roi = volume(disk(1.5), planes)
    report = minimize_spot(basis, roi)
    fields = [superpose(basis, report.coefficients, z) for z in planes]
    assert report.spot_size == pytest.approx(soim(fields, roi), rel=1e-6)


def test_bessel_superposition_squeezes_the_spot(k0):
    grid = square_grid(128, 0.25)
    basis = bessel_basis(theta_schedule(0.1, 11), 0, 1.0, 0.0, k0, grid)
    outer = basis.members[-1]
    R_B = first_dark_radius(outer)
    w_B = soim(outer, disk(R_B))

    report = minimize_spot(basis, disk(2.0))
    assert report.spot_size / w_B < 1
    assert R_B == pytest.approx(special.jn_zeros(0, 1)[0] / (k0 * np.sin(0.1)), abs=2 * grid.dx)


def test_bessel_squeeze_inside_reference_core(k0):
    grid = square_grid(128, 0.25)
    basis = bessel_basis(theta_schedule(0.1, 11), 0, 1.0, 0.0, k0, grid)
    outer = basis.members[-1]
    R_B = first_dark_radius(outer)
    w_B = soim(outer, disk(R_B))

    report = minimize_spot(basis, disk(R_B))
    assert report.spot_size / w_B < 1
    assert 0.007 <= report.strehl <= 0.06


def test_first_dark_radius_of_j0():
    grid = square_grid(256, 0.05)
    r, _ = grid.polar()
    field = SampledScalarField(grid=grid, values=special.j0(2.0 * r), k0=2 * np.pi)
    assert first_dark_radius(field) == pytest.approx(special.jn_zeros(0, 1)[0] / 2.0, abs=grid.dx)


def test_first_dark_radius_of_airy_pattern(k0):
    grid_in = square_grid(128, 1.0)
    aperture = (grid_in.polar()[0] <= 16.0).astype(complex)
    focused = fourier_lens(SampledScalarField(grid=grid_in, values=aperture, k0=k0), 500.0)
    assert first_dark_radius(focused) == pytest.approx(airy_first_zero(16.0, k0, 500.0), abs=focused.grid.dx)


def test_first_dark_radius_needs_a_minimum(k0, grid):
    with pytest.raises(UndefinedMeasureError):
        first_dark_radius(evaluate_lg(0, 0, 1.0, k0, grid))


def test_local_wavevector_of_quadratic_phase(k0, grid):
    h = grid.dx
    X, Y = grid.mesh()
    r = np.hypot(X, Y)
    field = SampledScalarField(grid=grid, values=np.exp(0.5j * r ** 2), k0=k0)
    k_r = local_wavevector(field)

    # central differences of exp(i x^2 / 2) give sin(x h) cos(h^2 / 2) / h along each axis
    expected = (X * np.sin(X * h) + Y * np.sin(Y * h)) * np.cos(h ** 2 / 2) / (h * r)
    interior = (slice(1, -1), slice(1, -1))
    np.testing.assert_allclose(k_r[interior], expected[interior], rtol=1e-9)
    near = (r < 1.0)[interior]
    np.testing.assert_allclose(k_r[interior][near], r[interior][near], rtol=0.01)
    assert np.all(np.isnan(k_r[0])) and np.all(np.isnan(k_r[:, -1]))


def test_local_wavevector_skips_dark_stencils(k0, grid):
    u = evaluate_lg(0, 0, 1.0, k0, grid)
    k_r = local_wavevector(u)
    dark = u.intensity < 1e-6 * u.intensity.max()
    assert np.all(np.isnan(k_r[dark]))
    np.testing.assert_allclose(k_r[~np.isnan(k_r)], 0.0, atol=1e-12)


def _superoscillating_field(k0, N=4, a=2.0):
    """(cos x + i a sin x)^N: harmonics up to N, local wavevector N a near x = 0 and x = pi."""
    grid = square_grid(128, 2 * np.pi / 128)
    X, _ = grid.mesh()
    values = (np.cos(X) + 1j * a * np.sin(X)) ** N
    return SampledScalarField(grid=grid, values=values, k0=k0)


def test_superoscillation_is_confined_to_the_dark_region(k0):
    field = _superoscillating_field(k0)
    mask, k_band = superoscillation_mask(field, band_fraction=1e-3)

    assert 4 - 1e-9 <= k_band <= 5 + 1e-9
    assert mask.any()
    assert field.intensity[mask].max() < 0.1 * field.intensity.max()


def test_sign_change_of_a_real_field_is_not_superoscillation(k0):
    grid = square_grid(256, 0.05)
    r, _ = grid.polar()
    field = SampledScalarField(grid=grid, values=np.exp(-r ** 2) - 0.5 * np.exp(-r ** 2 / 4), k0=k0)
    mask, k_band = superoscillation_mask(field)
    assert 0 < k_band < 10
    assert not mask.any()


def test_gaussian_does_not_superoscillate(k0, grid):
    mask, _ = superoscillation_mask(evaluate_lg(0, 0, 1.0, k0, grid))
    assert not mask.any()


def _lg25_grid(w0, dx):
    """Spans +-9 w0, past the outer turning point of radial order 24."""
    n = int(np.ceil(18 * w0 / dx))
    return square_grid(n + n % 2, dx)


@pytest.mark.slow
def test_lg25_squeeze_strehl_band_and_dark_super_oscillation(k0):
    strehls = []
    for w0 in (2.0, 3.0, 4.0):
        basis = lg_basis(25, 0, w0, k0, _lg25_grid(w0, 0.125))
        report = minimize_spot(basis, disk(1.0))
        strehls.append(report.strehl)

        field = superpose(basis, report.coefficients)
        mask, _ = superoscillation_mask(field)
        if mask.any():
            assert field.intensity[mask].max() < 0.1 * field.intensity.max()
    assert 0.01 <= min(strehls) <= 0.15


@pytest.mark.parametrize("scale", [3.0, 4.0])
def test_large_roi_has_no_super_oscillation(k0, scale):
    w0 = 2.0
    basis = lg_basis(25, 0, w0, k0, _lg25_grid(w0, 0.25))
    report = minimize_spot(basis, disk(scale * w0))
    mask, _ = superoscillation_mask(superpose(basis, report.coefficients))
    assert not mask.any()


def test_radius_sweep_flags_mode_count_drops(lg4):
    table = sweep_roi_radius(lg4, disk(1.0), [2.0, 1.0, 0.6, 0.3, 0.05], threshold=0.05)
    # No grid sample falls inside R = 0.05, so that radius is skipped
    assert [row.R for row in table.rows] == [2.0, 1.0, 0.6, 0.3]

    rows = sorted(table.rows, key=lambda row: row.R, reverse=True)
    assert not rows[0].step
    for larger, smaller in zip(rows, rows[1:]):
        assert smaller.step == (smaller.K < larger.K)
    assert table.step_radii() == [row.R for row in table.rows if row.step]
    assert all(0 < row.Strehl <= 1 for row in table.rows)


def test_radius_sweep_keeps_reference_spot(lg4):
    table = sweep_roi_radius(lg4, disk(1.0), [1.0, 1.5], reference_w=2.0, max_workers=2)
    assert table.reference_w == 2.0
    assert [row.R for row in table.rows] == [1.0, 1.5]


def test_mode_count_sweep_validates_input(lg4):
    with pytest.raises(InvalidArgumentError):
        sweep_mode_count(lg4, disk(1.0), [0, 2])
    with pytest.raises(InvalidArgumentError):
        sweep_mode_count(lg4, disk(1.0), [5])
    with pytest.raises(InvalidArgumentError):
        sweep_mode_count(lg4, disk(1.0), [2], measure=MeasureTag.EO)


def test_mode_count_sweep_of_spot_size(lg4):
    table = sweep_mode_count(lg4, disk(1.5), [1, 2, 4], measure=MeasureTag.SSO)
    assert [row.N for row in table.rows] == [1, 2, 4]
    assert all(row.w > 0 for row in table.rows)
