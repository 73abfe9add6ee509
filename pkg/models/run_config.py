"""Run configuration: everything needed to reproduce one CLI invocation."""

from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from utils.helpers import format_float


class BasisFamily(str, Enum):
    """Basis families the toolkit synthesizes."""
    LG = "lg"
    BESSEL = "bessel"
    RING = "ring"


class Polarization(str, Enum):
    """Polarization presets for vector Bessel members."""
    X = "x"
    Y = "y"
    CIRCULAR_PLUS = "circular+"
    CIRCULAR_MINUS = "circular-"


class OptimizeMeasure(str, Enum):
    """Pipelines selectable by `optimize --measure`."""
    TRANSMISSION = "transmission"
    SPOTSIZE = "spotsize"


class RunConfig(BaseModel):
    """
    Serializable echo of a run.

    Lengths are in units of the wavelength unless `si` is set, in which case
    they were given in metres and converted on load. The text form is one
    `key = value` pair per line; unknown keys are rejected.
    """

    command: str = Field(..., description="Subcommand name")

    # Basis
    basis: BasisFamily = Field(BasisFamily.LG, description="Basis family")
    N: int = Field(1, ge=1, description="Basis size")
    L: int = Field(0, description="Azimuthal index / topological charge")
    w0: float = Field(1.0, gt=0, description="LG waist")
    theta_max: float = Field(0.1, ge=0, lt=1.5707963267948966, description="Largest Bessel cone angle (NA analog)")
    polarization: Polarization = Field(Polarization.X, description="Vector Bessel polarization")

    # Grid
    nx: int = Field(128, ge=2, description="Samples per side")
    dx: float = Field(0.125, gt=0, description="Sample pitch")
    z: float = Field(0.0, description="Target plane")

    # ROI and sweep
    roi: str = Field("disk:R=w0", description="ROI spec string")
    sweep: Optional[str] = Field(None, description="Sweep range, e.g. R=1..50 or N=1..25")
    sweep_points: int = Field(25, ge=1, description="Points in a real-valued sweep")

    # Measures and thresholds
    measure: Optional[OptimizeMeasure] = Field(None, description="Pipeline for optimize")
    tau: float = Field(1e-3, ge=0, lt=1, description="Intensity retention fraction")
    epsilon: float = Field(1e-3, gt=0, lt=1, description="Spectral band fraction")

    # Bench
    ring_count: int = Field(11, ge=1)
    ring_outer_radius: float = Field(22.0, gt=0)
    slm_pixels: int = Field(512, ge=2)
    focal_length: float = Field(2000.0, gt=0)
    quantize: bool = True
    ccd_floor: float = Field(0.0, ge=0)
    nonlinearity: float = Field(0.0, ge=0)

    # Output
    output_dir: str = "qme_output"
    export_bundle: bool = True
    export_raster: bool = True
    si: bool = False

    model_config = ConfigDict(
        use_enum_values=True,
        extra="forbid",
        json_schema_extra={
            "example": {
                "command": "optimize",
                "basis": "lg",
                "N": 1,
                "roi": "disk:R=w0",
                "measure": "transmission",
            }
        },
    )

    @field_validator("sweep")
    @classmethod
    def _check_sweep(cls, value):
        if value is not None and "=" not in value:
            raise ValueError(f"Sweep must read PARAM=START..STOP, got: {value}")
        return value

    def to_text(self) -> str:
        """Key/value text, one pair per line, omitting unset optional values."""
        lines = ["# qme run configuration"]
        for key, value in self.model_dump().items():
            if value is None:
                continue
            lines.append(f"{key} = {format_float(value)}" if isinstance(value, float) else f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """Parse the key/value text produced by `to_text`."""
        return cls.model_validate(parse_key_values(text))

    def merged(self, overrides: Dict[str, object]) -> "RunConfig":
        """Copy with `overrides` applied and revalidated."""
        data = self.model_dump()
        data.update(overrides)
        return RunConfig.model_validate(data)


def parse_key_values(text: str) -> Dict[str, str]:
    """
    Parse `key = value` lines, skipping blanks and `#` comments.

    Args:
        text: File contents

    Returns:
        Mapping of keys to raw string values
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"Could not parse line {number}: {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
