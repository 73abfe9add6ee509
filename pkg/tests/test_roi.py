"""Tests for regions of interest and their quadrature weights."""

import numpy as np
import pytest

from services import (
    annulus,
    disk,
    full_plane,
    integrate,
    parse_roi_spec,
    plane_pair,
    rectangle,
    roi_center,
    roi_mask,
    square_grid,
    volume,
    with_radius,
)
from utils.errors import GridMismatchError, InvalidArgumentError


def test_disk_area_converges(fine_grid):
    area = integrate(disk(2.0), np.ones(fine_grid.shape), fine_grid)
    assert area == pytest.approx(np.pi * 4.0, rel=1e-3)


def test_complex_integrand_gives_complex_result(grid):
    result = integrate(disk(1.0), np.full(grid.shape, 1j), grid)
    assert isinstance(result, complex)
    assert result.real == 0.0
    assert result.imag > 0


def test_real_integrand_gives_float(grid):
    assert isinstance(integrate(disk(1.0), np.ones(grid.shape), grid), float)


def test_annulus_with_zero_inner_radius_includes_center():
    grid = square_grid(65, 0.1)
    mask = roi_mask(annulus(0.0, 1.0), grid)
    assert mask[32, 32] == pytest.approx(grid.cell_area)
    np.testing.assert_array_equal(mask, roi_mask(disk(1.0), grid))


def test_annulus_excludes_inner_disk():
    grid = square_grid(65, 0.1)
    mask = roi_mask(annulus(0.5, 1.0), grid)
    assert mask[32, 32] == 0.0
    assert np.count_nonzero(mask) == np.count_nonzero(roi_mask(disk(1.0), grid)) - np.count_nonzero(
        roi_mask(disk(0.5), grid)
    )


def test_full_plane_covers_grid(grid):
    mask = roi_mask(full_plane(), grid)
    assert np.all(mask == grid.cell_area)


def test_rectangle_extents(grid):
    mask = roi_mask(rectangle(2.0, 1.0), grid)
    X, Y = grid.mesh()
    expected = (np.abs(X) <= 1.0) & (np.abs(Y) <= 0.5)
    np.testing.assert_array_equal(mask > 0, expected)


def test_volume_weights_carry_plane_spacing(grid):
    roi = volume(disk(1.0), np.linspace(-1.0, 1.0, 5))
    weights = roi_mask(roi, grid)
    assert weights.shape == (5,) + grid.shape
    np.testing.assert_allclose(weights[2], 0.5 * roi_mask(disk(1.0), grid))
    assert roi_center(roi) == (0.0, 0.0, 0.0)


def test_plane_pair_center():
    roi = plane_pair(disk(2.0, center=(0.5, 0.0)), 1.0, 3.0)
    assert roi.z_planes == [1.0, 3.0]
    assert roi_center(roi) == (0.5, 0.0, 2.0)


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("disk:R=2", "disk:R=2.0,cx=0.0,cy=0.0"),
        ("disk:R=1.5w0,cx=1", "disk:R=3.0,cx=1.0,cy=0.0"),
        ("disk:R=4px", "disk:R=2.0,cx=0.0,cy=0.0"),
        ("annulus:Rin=1,Rout=2", "annulus:Rin=1.0,Rout=2.0,cx=0.0,cy=0.0"),
        ("rect:W=4,H=2", "rect:W=4.0,H=2.0,cx=0.0,cy=0.0"),
        ("full", "rect:W=None,H=None,cx=0.0,cy=0.0"),
    ],
)
def test_parse_roi_spec(spec, expected):
    roi = parse_roi_spec(spec, units={"w0": 2.0, "px": 0.5})
    assert roi.describe() == expected


def test_parse_volume_spec():
    roi = parse_roi_spec("volume:R=1,z=-2..2:5")
    assert roi.is_volume
    np.testing.assert_allclose(roi.z_planes, [-2.0, -1.0, 0.0, 1.0, 2.0])
    assert roi.planar.radius == 1.0


def test_parse_length_default_scale():
    roi = parse_roi_spec("disk:R=2e-6", default_scale=1 / 0.5e-6)
    assert roi.radius == pytest.approx(4.0)


@pytest.mark.parametrize("spec", ["hexagon:R=1", "disk", "disk:Rout=1", "annulus:Rin=1", "volume:R=1", "disk:R=1furlong"])
def test_parse_roi_spec_rejects(spec):
    with pytest.raises(ValueError):
        parse_roi_spec(spec)


def test_unknown_shape_is_invalid_argument():
    with pytest.raises(InvalidArgumentError):
        parse_roi_spec("hexagon:R=1")


def test_invalid_annulus():
    with pytest.raises(ValueError):
        annulus(2.0, 1.0)


def test_volume_planes_must_increase():
    with pytest.raises(ValueError):
        volume(disk(1.0), [1.0, 0.0])
    with pytest.raises(ValueError):
        volume(disk(1.0), [0.0])


def test_grid_mismatch():
    roi = disk(1.0, grid=square_grid(64, 0.1))
    with pytest.raises(GridMismatchError):
        roi_mask(roi, square_grid(64, 0.2))


def test_bound_grid_is_used():
    bound = square_grid(64, 0.1)
    np.testing.assert_array_equal(roi_mask(disk(1.0, grid=bound)), roi_mask(disk(1.0), bound))


def test_unbound_roi_needs_grid():
    with pytest.raises(InvalidArgumentError):
        roi_mask(disk(1.0))


def test_with_radius():
    assert with_radius(disk(1.0, center=(1.0, 0.0)), 2.5).describe() == "disk:R=2.5,cx=1.0,cy=0.0"
    stacked = with_radius(volume(disk(1.0), [0.0, 1.0]), 2.0)
    assert stacked.planar.radius == 2.0
    assert stacked.z_planes == [0.0, 1.0]
    with pytest.raises(InvalidArgumentError):
        with_radius(rectangle(1.0, 1.0), 2.0)


def test_outer_extent():
    assert disk(1.5).outer_extent == 1.5
    assert annulus(1.0, 2.0).outer_extent == 2.0
    assert rectangle(6.0, 8.0).outer_extent == pytest.approx(5.0)
    assert full_plane().outer_extent == float("inf")
