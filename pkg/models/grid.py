"""Sampling grids and sampled complex fields."""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Grid(BaseModel):
    """Uniform Cartesian sampling of a plane z = const."""

    nx: int = Field(..., ge=2, description="Sample count along x")
    ny: int = Field(..., ge=2, description="Sample count along y")
    dx: float = Field(..., gt=0, description="Sample pitch along x")
    dy: float = Field(..., gt=0, description="Sample pitch along y")
    x0: float = Field(0.0, description="Center offset along x")
    y0: float = Field(0.0, description="Center offset along y")
    z: float = Field(0.0, description="Plane coordinate")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"nx": 128, "ny": 128, "dx": 0.25, "dy": 0.25, "x0": 0.0, "y0": 0.0, "z": 0.0}},
    )

    @property
    def shape(self) -> Tuple[int, int]:
        """Array shape of sampled values, y outer."""
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) - (self.nx - 1) / 2) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) - (self.ny - 1) / 2) * self.dy

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Sample coordinates as (X, Y), each of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def polar(self, center: Tuple[float, float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Radius and azimuth of every sample about `center` (grid center by default)."""
        cx, cy = center if center is not None else (self.x0, self.y0)
        X, Y = self.mesh()
        return np.hypot(X - cx, Y - cy), np.arctan2(Y - cy, X - cx)

    def same_geometry(self, other: "Grid", check_z: bool = False) -> bool:
        """True when both grids sample the same transverse lattice."""
        same = (
            self.nx == other.nx
            and self.ny == other.ny
            and np.isclose(self.dx, other.dx, rtol=1e-12, atol=0.0)
            and np.isclose(self.dy, other.dy, rtol=1e-12, atol=0.0)
            and np.isclose(self.x0, other.x0, rtol=0.0, atol=1e-12 * self.dx)
            and np.isclose(self.y0, other.y0, rtol=0.0, atol=1e-12 * self.dy)
        )
        if check_z:
            same = same and np.isclose(self.z, other.z, rtol=0.0, atol=1e-12)
        return bool(same)

    def at_z(self, z: float) -> "Grid":
        """Same lattice on another plane."""
        return self.model_copy(update={"z": float(z)})

    def shifted(self, dx: float = 0.0, dy: float = 0.0, dz: float = 0.0) -> "Grid":
        """Lattice translated by (dx, dy, dz)."""
        return self.model_copy(update={"x0": self.x0 + dx, "y0": self.y0 + dy, "z": self.z + dz})


class SampledScalarField(BaseModel):
    """Complex scalar amplitude sampled on a grid."""

    grid: Grid
    values: np.ndarray = Field(..., description="Complex samples, shape (ny, nx)")
    k0: float = Field(..., gt=0, description="Vacuum wavenumber 2*pi/lambda")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return np.asarray(value, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_samples(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        return self

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.k0

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def power(self) -> float:
        """Plane-spanning integral of |u|^2."""
        return float(np.sum(self.intensity) * self.grid.cell_area)

    def with_values(self, values: np.ndarray, grid: Grid = None) -> "SampledScalarField":
        return SampledScalarField(grid=grid or self.grid, values=values, k0=self.k0)


class SampledVectorField(BaseModel):
    """Electric and magnetic complex vector fields sampled on a grid."""

    grid: Grid
    E: np.ndarray = Field(..., description="Electric field, shape (3, ny, nx)")
    H: np.ndarray = Field(..., description="Magnetic field, shape (3, ny, nx)")
    k0: float = Field(..., gt=0, description="Vacuum wavenumber 2*pi/lambda")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("E", "H", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return np.asarray(value, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_samples(self):
        expected = (3,) + self.grid.shape
        for name, array in (("E", self.E), ("H", self.H)):
            if array.shape != expected:
                raise ValueError(f"{name} shape {array.shape} does not match {expected}")
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{name} values must be finite")
        return self

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.k0

    @property
    def flux_density(self) -> np.ndarray:
        """z component of Re(E* x H), the intensity the IO operator integrates."""
        return np.real(np.conj(self.E[0]) * self.H[1] - np.conj(self.E[1]) * self.H[0])

    @property
    def intensity(self) -> np.ndarray:
        return self.flux_density

    def power(self) -> float:
        return float(np.sum(self.flux_density) * self.grid.cell_area)
