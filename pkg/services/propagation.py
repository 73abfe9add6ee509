"""Scalar free-space propagation: angular spectrum and Fourier-lens transforms."""

import logging

import numpy as np

from models import Grid, SampledScalarField
from utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


def transfer_function(grid: Grid, k0: float, dz: float) -> np.ndarray:
    """
    Angular-spectrum transfer factor exp(i dz k_z) in FFT ordering.

    Evanescent components (kx^2 + ky^2 > k0^2) are set to zero for either
    sign of dz.
    """
    kx = 2 * np.pi * np.fft.fftfreq(grid.nx, d=grid.dx)
    ky = 2 * np.pi * np.fft.fftfreq(grid.ny, d=grid.dy)
    KX, KY = np.meshgrid(kx, ky, indexing="xy")
    kz_sq = k0 ** 2 - KX ** 2 - KY ** 2
    propagating = kz_sq >= 0
    kz = np.sqrt(np.where(propagating, kz_sq, 0.0))
    return np.where(propagating, np.exp(1j * dz * kz), 0.0)


def angular_spectrum_propagate(field: SampledScalarField, dz: float) -> SampledScalarField:
    """
    Propagate a scalar field by `dz` with the exact angular-spectrum kernel.

    Args:
        field: Input field on the plane field.grid.z
        dz: Propagation distance (either sign)

    Returns:
        Field on the plane field.grid.z + dz
    """
    grid_out = field.grid.at_z(field.grid.z + dz)
    if dz == 0:
        return field.with_values(field.values.copy(), grid_out)

    spectrum = np.fft.fft2(field.values)
    H = transfer_function(field.grid, field.k0, dz)

    total = np.sum(np.abs(spectrum) ** 2)
    lost = np.sum(np.abs(spectrum[H == 0]) ** 2)
    if total > 0 and lost / total > 1e-6:
        logger.warning("Discarded %.3g of the spectral power as evanescent", lost / total)

    values = np.fft.ifft2(spectrum * H)
    return field.with_values(values, grid_out)


def conjugate_grid(grid: Grid, k0: float, f: float) -> Grid:
    """
    Fourier-plane grid of a lens with focal length `f`.

    The pitch is lambda f / (n dx) per axis; the plane lies 2f behind the input.
    """
    if f <= 0:
        raise InvalidArgumentError(f"Focal length must be positive, got {f}")
    wavelength = 2 * np.pi / k0
    return Grid(
        nx=grid.nx,
        ny=grid.ny,
        dx=wavelength * f / (grid.nx * grid.dx),
        dy=wavelength * f / (grid.ny * grid.dy),
        x0=0.0,
        y0=0.0,
        z=grid.z + 2 * f,
    )


def matrix_fourier_transform(
    values: np.ndarray,
    grid_in: Grid,
    grid_out: Grid,
    k0: float,
    f: float,
) -> np.ndarray:
    """
    Fraunhofer integral (1 / (i lambda f)) sum u(x, y) exp(-i k0 (x u + y v) / f) dx dy.

    Evaluated as two matrix products, so any pair of grids is allowed.
    """
    wavelength = 2 * np.pi / k0
    Wx = np.exp(-1j * k0 / f * np.outer(grid_out.x, grid_in.x))
    Wy = np.exp(-1j * k0 / f * np.outer(grid_out.y, grid_in.y))
    prefactor = grid_in.dx * grid_in.dy / (1j * wavelength * f)
    return prefactor * (Wy @ values @ Wx.T)


def fourier_lens(field: SampledScalarField, f: float) -> SampledScalarField:
    """
    Field in the back focal plane of a thin lens.

    On the conjugate grid the transform is a centered DFT, so the
    plane-spanning power is conserved exactly.

    Args:
        field: Front focal plane field
        f: Focal length

    Returns:
        Field on `conjugate_grid(field.grid, k0, f)`
    """
    grid_out = conjugate_grid(field.grid, field.k0, f)
    values = matrix_fourier_transform(field.values, field.grid, grid_out, field.k0, f)
    logger.debug("Fourier lens f=%g: pitch %g -> %g", f, field.grid.dx, grid_out.dx)
    return field.with_values(values, grid_out)


def second_moment_radius(field: SampledScalarField) -> float:
    """2 * sqrt(<r^2>) of |u|^2 about its intensity centroid."""
    X, Y = field.grid.mesh()
    intensity = field.intensity
    total = intensity.sum()
    if total <= 0:
        raise InvalidArgumentError("Second moment of an all-zero field is undefined")
    cx = (X * intensity).sum() / total
    cy = (Y * intensity).sum() / total
    r2 = ((X - cx) ** 2 + (Y - cy) ** 2) * intensity
    return float(2 * np.sqrt(r2.sum() / total))
