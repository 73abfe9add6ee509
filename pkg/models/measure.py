"""Measure matrices, normalized bases and eigensolutions."""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MeasureTag(str, Enum):
    """Quadratic measure represented by a matrix."""
    IO = "IO"
    SSO = "SSO"
    EO = "EO"
    CSO = "CSO"
    OFO_X = "OFO_x"
    OFO_Y = "OFO_y"
    OFO_Z = "OFO_z"


class MeasureMatrix(BaseModel):
    """N x N Hermitian matrix of a quadratic measure on a basis subspace."""

    entries: np.ndarray = Field(..., description="Complex N x N entries")
    tag: MeasureTag = Field(..., description="Measure the matrix represents")
    roi: str = Field("", description="Text form of the region of interest")
    basis_hash: str = Field("", description="Fingerprint of the basis")
    normalized: bool = Field(False, description="Entries expressed in the intensity-normalized base")

    model_config = ConfigDict(arbitrary_types_allowed=True, use_enum_values=True, frozen=True)

    @field_validator("entries", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return np.asarray(value, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_square(self):
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"measure matrix must be square, got {self.entries.shape}")
        return self

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2)) if self.size else 0.0

    def value(self, coefficients: np.ndarray) -> float:
        """a* M a for a coefficient vector a."""
        a = np.asarray(coefficients, dtype=np.complex128)
        return float(np.real(np.vdot(a, self.entries @ a)))


class NormalizedBase(BaseModel):
    """Intensity-normalized base of the retained IO eigenmodes."""

    transform: np.ndarray = Field(..., description="N x K map to original coefficients")
    eigenvalues: np.ndarray = Field(..., description="Retained IO eigenvalues, descending")
    eigenvectors: np.ndarray = Field(..., description="Retained IO eigenvectors, N x K")
    threshold: float = Field(..., ge=0, lt=1, description="Retention fraction tau")
    total_intensity: float = Field(..., description="Sum of all IO eigenvalues")
    basis_hash: str = Field("", description="Fingerprint of the basis")
    roi: str = Field("", description="Text form of the region of interest")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def retained(self) -> int:
        """K, the number of retained modes."""
        return self.transform.shape[1]

    @property
    def size(self) -> int:
        """N, the original basis size."""
        return self.transform.shape[0]


class EigenSolution(BaseModel):
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray = Field(..., description="Real eigenvalues, descending")
    eigenvectors: np.ndarray = Field(..., description="N x N, column k belongs to eigenvalue k")
    residual_norm: float = Field(..., description="max_k |M v_k - lambda_k v_k|")
    tag: Optional[MeasureTag] = Field(None, description="Measure of the decomposed matrix")
    roi: str = ""
    threshold: Optional[float] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, use_enum_values=True, frozen=True)

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def max_pair(self):
        return float(self.eigenvalues[0]), self.eigenvectors[:, 0]

    @property
    def min_pair(self):
        return float(self.eigenvalues[-1]), self.eigenvectors[:, -1]
