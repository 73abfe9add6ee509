"""Bench simulation models: SLM patterns, CCD frames and retrieval results."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .grid import Grid

SLM_LEVELS = 256


class SlmPattern(BaseModel):
    """Dual-panel 8-bit modulation: amplitude and phase channels."""

    amplitude: np.ndarray = Field(..., description="uint8 amplitude levels, 0 -> 0 and 255 -> 1")
    phase: np.ndarray = Field(..., description="uint8 phase levels, level n -> 2*pi*n/256")
    grid: Grid

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("amplitude", "phase", mode="before")
    @classmethod
    def _as_levels(cls, value):
        array = np.asarray(value)
        if array.dtype != np.uint8:
            if np.any(array < 0) or np.any(array > SLM_LEVELS - 1):
                raise ValueError("SLM levels must lie in 0..255")
            array = array.astype(np.uint8)
        return array

    @model_validator(mode="after")
    def _check_shape(self):
        for name, array in (("amplitude", self.amplitude), ("phase", self.phase)):
            if array.shape != self.grid.shape:
                raise ValueError(f"{name} channel shape {array.shape} does not match grid {self.grid.shape}")
        return self

    @property
    def amplitude_values(self) -> np.ndarray:
        return self.amplitude.astype(np.float64) / (SLM_LEVELS - 1)

    @property
    def phase_values(self) -> np.ndarray:
        return 2 * np.pi * self.phase.astype(np.float64) / SLM_LEVELS


class CcdParameters(BaseModel):
    """Detector response."""
    gain: float = Field(1.0, gt=0, description="Counts per unit intensity")
    floor: float = Field(0.0, ge=0, description="Sensitivity floor in counts")
    saturation: float = Field(float("inf"), gt=0, description="Saturation level in counts")
    noise_sigma: float = Field(0.0, ge=0, description="Additive Gaussian noise in counts")
    seed: int = Field(0, description="Noise generator seed")
    nonlinearity: float = Field(0.0, ge=0, description="Intensity-dependent gain coefficient")
    full_well: float = Field(1.0, gt=0, description="Counts at which the nonlinear gain reaches 1 + nonlinearity")


class CcdFrame(BaseModel):
    """Captured intensity frame."""

    counts: np.ndarray = Field(..., description="Nonnegative counts per pixel")
    grid: Grid
    floor: float = 0.0
    saturation: float = float("inf")
    gain: float = 1.0

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("counts", mode="before")
    @classmethod
    def _as_float(cls, value):
        return np.asarray(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_counts(self):
        if self.counts.shape != self.grid.shape:
            raise ValueError(f"frame shape {self.counts.shape} does not match grid {self.grid.shape}")
        if np.any(self.counts < 0):
            raise ValueError("frame counts must be nonnegative")
        return self

    @property
    def intensity(self) -> np.ndarray:
        """Counts converted back to field intensity units."""
        return self.counts / self.gain


class RetrievalResult(BaseModel):
    """Three-step phase retrieval output for one field."""

    phase: np.ndarray = Field(..., description="Phase relative to the reference, mod 2*pi; NaN if unretrievable")
    amplitude: np.ndarray = Field(..., description="Recovered amplitude; NaN if unretrievable")
    background: np.ndarray = Field(..., description="Recovered background intensity")
    visibility: np.ndarray = Field(..., description="Recovered fringe modulation gamma")
    valid: np.ndarray = Field(..., description="True where the pixel was retrievable")
    grid: Grid

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def field(self) -> np.ndarray:
        """Complex field with unretrievable pixels set to zero."""
        values = np.where(self.valid, self.amplitude * np.exp(1j * np.nan_to_num(self.phase)), 0.0)
        return np.nan_to_num(values)


class LinearityCheck(BaseModel):
    """Exp-S versus Num-S comparison."""
    discrepancy: float = Field(..., ge=0, description="Relative L2 difference")
    exp_s: np.ndarray
    num_s: np.ndarray
    tolerance: float = 0.02

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def linear(self) -> bool:
        return self.discrepancy <= self.tolerance
