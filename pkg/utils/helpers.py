"""Utility helper functions for spec strings and numeric formatting."""

import re
from typing import Dict, Optional, Tuple

_LENGTH = re.compile(
    r"^(?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(?P<unit>[A-Za-zλ][A-Za-z0-9_]*)?$"
)


def parse_length(token: str, units: Optional[Dict[str, float]] = None, default_scale: float = 1.0) -> float:
    """
    Parse a length such as "2", "1.5w0", "w0", "7px" or "0.5lambda".

    Args:
        token: Length text
        units: Scale of each unit token in the working length unit
        default_scale: Scale applied to bare numbers

    Returns:
        Length in the working unit
    """
    text = token.strip()
    match = _LENGTH.match(text)
    if not text or match is None or (match.group("number") is None and match.group("unit") is None):
        raise ValueError(f"Could not parse length: {token}")

    number = float(match.group("number")) if match.group("number") is not None else 1.0
    unit = match.group("unit")
    if unit is None:
        return number * default_scale

    scales = {"lambda": 1.0, "λ": 1.0}
    scales.update(units or {})
    if unit not in scales:
        raise ValueError(f"Unknown length unit: {unit}")
    return number * scales[unit]


def parse_range(
    text: str,
    units: Optional[Dict[str, float]] = None,
    default_scale: float = 1.0,
) -> Tuple[float, float, Optional[int]]:
    """
    Parse "START..STOP" or "START..STOP:COUNT".

    Returns:
        (start, stop, count); count is None when not given
    """
    body, _, count = text.partition(":")
    if ".." not in body:
        raise ValueError(f"Could not parse range: {text}")
    start, stop = body.split("..", 1)
    n = None
    if count:
        n = int(count)
        if n < 1:
            raise ValueError(f"Range count must be positive: {text}")
    return parse_length(start, units, default_scale), parse_length(stop, units, default_scale), n


def parse_spec_string(text: str) -> Tuple[str, Dict[str, str]]:
    """
    Split "name:key=value,key=value" into its name and raw parameters.

    Args:
        text: Spec string, e.g. "disk:R=w0,cx=0"

    Returns:
        Lower-cased name and a mapping of raw parameter strings
    """
    name, _, rest = text.strip().partition(":")
    if not name:
        raise ValueError(f"Could not parse spec: {text}")
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        if "=" not in item:
            raise ValueError(f"Could not parse spec parameter '{item}' in: {text}")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return name.strip().lower(), params


def format_float(value: float) -> str:
    """Round-trippable text for a real number, numpy scalars included."""
    return repr(float(value))


def format_complex(value: complex) -> str:
    """Round-trippable text for a complex number."""
    value = complex(value)
    return f"{format_float(value.real)},{format_float(value.imag)}"


def parse_complex(text: str) -> complex:
    """Inverse of `format_complex`."""
    try:
        re_part, im_part = text.split(",")
        return complex(float(re_part), float(im_part))
    except ValueError:
        raise ValueError(f"Could not parse complex value: {text}")
