"""Utilities module."""

from .errors import (
    BundleFormatError,
    EmptyBaseError,
    GridMismatchError,
    InvalidArgumentError,
    QmeError,
    UndefinedMeasureError,
    UnsupportedKernelError,
)
from .helpers import format_complex, format_float, parse_complex, parse_length, parse_range, parse_spec_string
from .logging_setup import configure_logging
from .raster import emit_raster, intensity_levels, read_pgm16, read_slm_rgb, write_pgm16, write_slm_rgb

__all__ = [
    "QmeError",
    "InvalidArgumentError",
    "GridMismatchError",
    "EmptyBaseError",
    "UnsupportedKernelError",
    "UndefinedMeasureError",
    "BundleFormatError",
    "parse_length",
    "parse_range",
    "parse_spec_string",
    "format_complex",
    "format_float",
    "parse_complex",
    "configure_logging",
    "emit_raster",
    "intensity_levels",
    "write_pgm16",
    "read_pgm16",
    "write_slm_rgb",
    "read_slm_rgb",
]
