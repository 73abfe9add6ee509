"""Optimization reports and sweep tables."""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.helpers import format_complex, format_float

from .measure import MeasureTag


class OptimizationReport(BaseModel):
    """Outcome of one QME optimization."""

    coefficients: np.ndarray = Field(..., description="N complex superposition coefficients")
    tag: MeasureTag = Field(..., description="Optimized measure")
    eigenvalue: float = Field(..., description="Extremal eigenvalue reached")

    # Measures of the optimized superposition
    spot_size: Optional[float] = Field(None, ge=0, description="SOIM w = 2 sqrt(m2/m0)")
    transmittance: Optional[float] = Field(None, description="ROI transmittance T")
    strehl: Optional[float] = Field(None, description="Intensity Strehl ratio")
    retained: int = Field(..., ge=0, description="Retained mode count K")

    # Parameter echo
    basis_size: int = Field(..., ge=1, description="Basis size N")
    roi: str = Field("", description="Text form of the region of interest")
    threshold: Optional[float] = Field(None, description="Retention fraction tau")
    parameters: Dict[str, str] = Field(default_factory=dict, description="Free-form parameter echo")

    model_config = ConfigDict(arbitrary_types_allowed=True, use_enum_values=True)

    @field_validator("coefficients", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return np.asarray(value, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.transmittance is not None and not (-1e-9 <= self.transmittance <= 1 + 1e-9):
            raise ValueError(f"transmittance out of range: {self.transmittance}")
        if self.strehl is not None and not (0 < self.strehl <= 1 + 1e-9):
            raise ValueError(f"Strehl ratio out of range: {self.strehl}")
        if self.retained > self.basis_size:
            raise ValueError("retained mode count exceeds basis size")
        return self

    def as_record(self) -> Dict[str, str]:
        """Flat key/value form used for text reports."""
        record = {
            "measure": str(self.tag),
            "eigenvalue": format_float(self.eigenvalue),
            "N": str(self.basis_size),
            "K": str(self.retained),
            "roi": self.roi,
        }
        if self.spot_size is not None:
            record["w"] = format_float(self.spot_size)
        if self.transmittance is not None:
            record["T"] = format_float(self.transmittance)
        if self.strehl is not None:
            record["strehl"] = format_float(self.strehl)
        if self.threshold is not None:
            record["tau"] = format_float(self.threshold)
        for i, c in enumerate(self.coefficients):
            record[f"a{i}"] = format_complex(c)
        record.update({f"param.{k}": v for k, v in self.parameters.items()})
        return record


class SweepRow(BaseModel):
    """One parameter point of a sweep."""
    R: float
    N: int
    K: int
    w: float
    T: Optional[float] = None
    Strehl: Optional[float] = None
    step: bool = Field(False, description="K dropped relative to the previous, larger ROI")


class SweepTable(BaseModel):
    """Ordered sweep results."""
    rows: List[SweepRow] = Field(default_factory=list)
    reference_w: Optional[float] = Field(None, description="Normalizing spot size (w_B) if any")

    @property
    def radii(self) -> np.ndarray:
        return np.array([row.R for row in self.rows])

    @property
    def spot_sizes(self) -> np.ndarray:
        return np.array([row.w for row in self.rows])

    def step_radii(self) -> List[float]:
        """Radii at which the retained mode count changes."""
        return [row.R for row in self.rows if row.step]
