"""Shared fixtures: small grids, LG and Bessel bases, a small ring bench."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from models import CcdParameters  # noqa: E402
from services import (  # noqa: E402
    BenchSimulator,
    bessel_basis,
    encode_ring_basis,
    lg_basis,
    square_grid,
    theta_schedule,
)

K0 = 2 * np.pi


@pytest.fixture
def k0():
    return K0


@pytest.fixture
def grid():
    """128 x 128 samples at lambda/8, spanning +-8 lambda."""
    return square_grid(128, 0.125)


@pytest.fixture
def fine_grid():
    """512 x 512 samples at lambda/100 for disk-boundary-sensitive oracles."""
    return square_grid(512, 0.01)


@pytest.fixture
def lg4(grid):
    """LG radial modes P = 0..3, L = 0, w0 = 1."""
    return lg_basis(4, 0, 1.0, K0, grid)


@pytest.fixture
def bessel_grid():
    return square_grid(96, 0.25)


@pytest.fixture
def bessel_x(bessel_grid):
    """Six x-polarized L = 0 Bessel beams with cone angles up to 0.1 rad."""
    return bessel_basis(theta_schedule(0.1, 6), 0, 1.0, 0.0, K0, bessel_grid)


@pytest.fixture
def slm_grid():
    return square_grid(256, 1.0)


@pytest.fixture
def ring_basis(slm_grid):
    """Four rings tiling a 16-pixel disk, lens f = 500."""
    basis, patterns = encode_ring_basis(4, None, slm_grid, K0, 500.0, outer_radius=16.0)
    return basis, patterns


@pytest.fixture
def ideal_bench(slm_grid):
    return BenchSimulator(slm_grid, K0, 500.0, ccd=CcdParameters(), quantize=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
