"""Beam basis model: ordered basis fields plus their generation parameters."""

from enum import Enum
from typing import Annotated, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.errors import GridMismatchError

from .grid import SampledScalarField, SampledVectorField

SampledField = Union[SampledScalarField, SampledVectorField]


class BasisKind(str, Enum):
    """Field representation of the basis members."""
    SCALAR = "scalar"
    VECTOR = "vector"


class LgParameters(BaseModel):
    """Laguerre-Gaussian member."""
    family: Literal["lg"] = "lg"
    P: int = Field(..., ge=0, description="Radial index")
    L: int = Field(0, description="Azimuthal index")
    w0: float = Field(..., gt=0, description="Gaussian waist")


class BesselParameters(BaseModel):
    """Vector Bessel member."""
    family: Literal["bessel"] = "bessel"
    theta: float = Field(..., ge=0, description="Cone angle in radians")
    L: int = Field(0, description="Topological charge")
    alpha: complex = Field(1.0, description="x polarization weight")
    beta: complex = Field(0.0, description="y polarization weight")
    E0: float = Field(1.0, description="Amplitude")


class RingParameters(BaseModel):
    """Annular SLM amplitude mask member."""
    family: Literal["ring"] = "ring"
    r_in: float = Field(..., ge=0, description="Inner radius on the SLM")
    r_out: float = Field(..., gt=0, description="Outer radius on the SLM")
    focal_length: float = Field(..., gt=0, description="Fourier lens focal length")


MemberParameters = Union[LgParameters, BesselParameters, RingParameters]


class BeamBasis(BaseModel):
    """
    Ordered set of N basis fields.

    `members` holds the fields on the target plane z2, `initial_members` the same
    basis on the initial plane z1 when known, and `layers` any additional target
    planes needed by volumetric or plane-pair regions of interest. Position i in
    every list refers to the same basis member.
    """

    kind: BasisKind
    members: List[SampledField] = Field(..., min_length=1)
    initial_members: List[SampledField] = Field(default_factory=list)
    layers: List[List[SampledField]] = Field(default_factory=list)
    parameters: List[Annotated[MemberParameters, Field(discriminator="family")]] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True, use_enum_values=True)

    @model_validator(mode="after")
    def _check_members(self):
        expected = SampledScalarField if self.kind == BasisKind.SCALAR.value else SampledVectorField
        n = len(self.members)
        reference = self.members[0]
        for group in [self.members, self.initial_members] + list(self.layers):
            if group and len(group) != n:
                raise ValueError(f"every plane must carry {n} members, got {len(group)}")
            for member in group:
                if not isinstance(member, expected):
                    raise ValueError(f"{self.kind} basis cannot hold {type(member).__name__}")
                if not np.isclose(member.k0, reference.k0, rtol=1e-12):
                    raise ValueError("all members must share k0")
            if group:
                z = group[0].grid.z
                for member in group:
                    if not member.grid.same_geometry(group[0].grid) or not np.isclose(member.grid.z, z):
                        raise ValueError("members on one plane must share grid geometry")
        if self.parameters and len(self.parameters) != n:
            raise ValueError(f"expected {n} parameter records, got {len(self.parameters)}")
        return self

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_vector(self) -> bool:
        return self.kind == BasisKind.VECTOR.value

    @property
    def grid(self):
        return self.members[0].grid

    @property
    def k0(self) -> float:
        return self.members[0].k0

    def planes(self) -> List[List[SampledField]]:
        """All target-plane groups, primary plane first."""
        return [self.members] + list(self.layers)

    def plane(self, z: float) -> List[SampledField]:
        """Members on the target plane at coordinate z."""
        for group in self.planes():
            if np.isclose(group[0].grid.z, z, rtol=0.0, atol=1e-9):
                return group
        available = sorted(group[0].grid.z for group in self.planes())
        raise GridMismatchError(f"No basis plane at z={z}; available: {available}")

    def subset(self, indices: List[int]) -> "BeamBasis":
        """Basis restricted to the listed members, order preserved."""
        def pick(group):
            return [group[i] for i in indices] if group else []

        return BeamBasis(
            kind=self.kind,
            members=pick(self.members),
            initial_members=pick(self.initial_members),
            layers=[pick(layer) for layer in self.layers],
            parameters=pick(self.parameters),
        )
