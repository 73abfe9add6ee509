"""Region of interest model."""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.helpers import format_float

from .grid import Grid


class RoiShape(str, Enum):
    """Supported region shapes."""
    DISK = "disk"
    ANNULUS = "annulus"
    RECTANGLE = "rectangle"
    VOLUME = "volume"


class RegionOfInterest(BaseModel):
    """
    Surface or volume over which measure integrals are taken.

    Planar shapes are decided by sample-center inclusion. A volume is a stack of
    planar sections at strictly increasing z; its sections all use `section`.
    """

    shape: RoiShape = Field(..., description="Region shape")
    center: Tuple[float, float] = Field((0.0, 0.0), description="Region/beam center r0 in the plane")

    # Disk and annulus
    radius: Optional[float] = Field(None, gt=0, description="Disk radius R")
    inner_radius: Optional[float] = Field(None, ge=0, description="Annulus inner radius")
    outer_radius: Optional[float] = Field(None, gt=0, description="Annulus outer radius")

    # Rectangle (None spans the whole grid)
    width: Optional[float] = Field(None, gt=0, description="Rectangle extent along x")
    height: Optional[float] = Field(None, gt=0, description="Rectangle extent along y")

    # Volume
    z_planes: List[float] = Field(default_factory=list, description="Plane coordinates of a volume")
    section: Optional["RegionOfInterest"] = Field(None, description="Planar section of a volume")

    # Optional grid binding
    grid: Optional[Grid] = Field(None, description="Grid the region was declared on")

    model_config = ConfigDict(
        use_enum_values=True,
        frozen=True,
        json_schema_extra={"example": {"shape": "disk", "center": [0.0, 0.0], "radius": 1.0}},
    )

    @model_validator(mode="after")
    def _check_shape(self):
        shape = RoiShape(self.shape)
        if shape == RoiShape.DISK and self.radius is None:
            raise ValueError("disk requires a radius")
        if shape == RoiShape.ANNULUS:
            if self.outer_radius is None or self.inner_radius is None:
                raise ValueError("annulus requires inner_radius and outer_radius")
            if not self.outer_radius > self.inner_radius:
                raise ValueError("annulus requires outer_radius > inner_radius")
        if shape == RoiShape.VOLUME:
            if len(self.z_planes) < 2:
                raise ValueError("volume requires at least two planes")
            if np.any(np.diff(self.z_planes) <= 0):
                raise ValueError("volume planes must have strictly increasing z")
            if self.section is None or RoiShape(self.section.shape) == RoiShape.VOLUME:
                raise ValueError("volume requires a planar section")
        return self

    @property
    def is_volume(self) -> bool:
        return RoiShape(self.shape) == RoiShape.VOLUME

    @property
    def planar(self) -> "RegionOfInterest":
        """Planar region applied on each plane."""
        return self.section if self.is_volume else self

    @property
    def z_center(self) -> float:
        return float(np.mean([self.z_planes[0], self.z_planes[-1]])) if self.is_volume else 0.0

    @property
    def outer_extent(self) -> float:
        """Largest radial extent of the region, used for overlays and sweeps."""
        planar = self.planar
        shape = RoiShape(planar.shape)
        if shape == RoiShape.DISK:
            return planar.radius
        if shape == RoiShape.ANNULUS:
            return planar.outer_radius
        if planar.width is None or planar.height is None:
            return float("inf")
        return float(np.hypot(planar.width, planar.height) / 2)

    def describe(self) -> str:
        """Compact text form used in file headers and reports."""
        shape = RoiShape(self.shape)
        cx, cy = (format_float(c) for c in self.center)
        if shape == RoiShape.DISK:
            text = f"disk:R={format_float(self.radius)},cx={cx},cy={cy}"
        elif shape == RoiShape.ANNULUS:
            text = f"annulus:Rin={format_float(self.inner_radius)},Rout={format_float(self.outer_radius)},cx={cx},cy={cy}"
        elif shape == RoiShape.RECTANGLE:
            width, height = ("None" if v is None else format_float(v) for v in (self.width, self.height))
            text = f"rect:W={width},H={height},cx={cx},cy={cy}"
        else:
            zs = ",".join(format_float(z) for z in self.z_planes)
            text = f"volume[{self.section.describe()}]:z={zs}"
        return text


RegionOfInterest.model_rebuild()
