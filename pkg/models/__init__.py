"""Domain models for the QME toolkit."""

from .grid import Grid, SampledScalarField, SampledVectorField
from .basis import (
    BasisKind,
    BeamBasis,
    BesselParameters,
    LgParameters,
    MemberParameters,
    RingParameters,
    SampledField,
)
from .roi import RegionOfInterest, RoiShape
from .measure import EigenSolution, MeasureMatrix, MeasureTag, NormalizedBase
from .report import OptimizationReport, SweepRow, SweepTable
from .bench import CcdFrame, CcdParameters, LinearityCheck, RetrievalResult, SlmPattern
from .run_config import BasisFamily, OptimizeMeasure, Polarization, RunConfig, parse_key_values

__all__ = [
    "Grid",
    "SampledScalarField",
    "SampledVectorField",
    "SampledField",
    "BasisKind",
    "BeamBasis",
    "LgParameters",
    "BesselParameters",
    "RingParameters",
    "MemberParameters",
    "RegionOfInterest",
    "RoiShape",
    "MeasureMatrix",
    "MeasureTag",
    "NormalizedBase",
    "EigenSolution",
    "OptimizationReport",
    "SweepRow",
    "SweepTable",
    "SlmPattern",
    "CcdFrame",
    "CcdParameters",
    "RetrievalResult",
    "LinearityCheck",
    "RunConfig",
    "BasisFamily",
    "Polarization",
    "OptimizeMeasure",
    "parse_key_values",
]
