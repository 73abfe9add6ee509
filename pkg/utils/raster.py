"""Raster emission: intensity pixmaps, 16-bit CCD graymaps and SLM RGB patterns."""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from PIL import Image, ImageDraw

from .errors import BundleFormatError, InvalidArgumentError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Overlay circle in array-index coordinates: (column, row, radius in pixels)
Circle = Tuple[float, float, float]

COLORMAPS = ("gray", "hot")


def _apply_colormap(level: np.ndarray, colormap: str) -> np.ndarray:
    if colormap == "gray":
        return np.repeat(level[..., None], 3, axis=-1)
    if colormap == "hot":
        red = np.clip(3 * level, 0, 1)
        green = np.clip(3 * level - 1, 0, 1)
        blue = np.clip(3 * level - 2, 0, 1)
        return np.stack([red, green, blue], axis=-1)
    raise InvalidArgumentError(f"Unsupported colormap: {colormap}")


def intensity_levels(data: np.ndarray) -> np.ndarray:
    """Peak-normalised 8-bit levels of |data|^2 (complex) or data (real)."""
    array = np.asarray(data)
    intensity = np.abs(array) ** 2 if np.iscomplexobj(array) else array.astype(np.float64)
    if not np.all(np.isfinite(intensity)):
        raise InvalidArgumentError("Cannot render non-finite data")
    intensity = np.clip(intensity, 0, None)
    peak = intensity.max() if intensity.size else 0.0
    if peak <= 0:
        return np.zeros(intensity.shape, dtype=np.uint8)
    return np.rint(255 * intensity / peak).astype(np.uint8)


def emit_raster(
    data: np.ndarray,
    path: PathLike,
    colormap: str = "gray",
    circle: Optional[Circle] = None,
) -> Path:
    """
    Write an 8-bit portable pixmap of normalised intensity.

    Rows are flipped so that +y points up in the image.

    Args:
        data: Complex field samples or real intensities, shape (ny, nx)
        path: Output file
        colormap: "gray" or "hot"
        circle: Optional red ROI overlay in array-index coordinates

    Returns:
        Path of the written file
    """
    levels = intensity_levels(data)
    rgb = np.rint(255 * _apply_colormap(levels / 255.0, colormap)).astype(np.uint8)
    image = Image.fromarray(np.ascontiguousarray(np.flipud(rgb)))

    if circle is not None:
        col, row, radius = circle
        top = (levels.shape[0] - 1) - row
        ImageDraw.Draw(image).ellipse(
            [col - radius, top - radius, col + radius, top + radius], outline=(255, 0, 0)
        )

    target = Path(path)
    try:
        image.save(target, format="PPM")
    except OSError as exc:
        raise BundleFormatError(f"Could not write raster {target}: {exc}") from exc
    logger.debug("Wrote raster %s (%dx%d)", target, levels.shape[1], levels.shape[0])
    return target


def write_pgm16(counts: np.ndarray, path: PathLike) -> float:
    """
    Write counts as a 16-bit portable graymap.

    Counts above the 16-bit range are rescaled to fit.

    Returns:
        Scale applied to the counts before rounding
    """
    values = np.clip(np.asarray(counts, dtype=np.float64), 0, None)
    peak = values.max() if values.size else 0.0
    scale = 1.0
    if peak > 65535:
        scale = 65535 / peak
        logger.warning("Counts exceed 16 bits; rescaled by %.6g for %s", scale, path)
    levels = np.rint(values * scale).astype(np.int32)
    target = Path(path)
    try:
        Image.fromarray(np.ascontiguousarray(np.flipud(levels))).save(target, format="PPM")
    except OSError as exc:
        raise BundleFormatError(f"Could not write graymap {target}: {exc}") from exc
    return scale


def read_pgm16(path: PathLike) -> np.ndarray:
    """Read a graymap written by `write_pgm16` back into array orientation."""
    try:
        with Image.open(path) as image:
            return np.flipud(np.asarray(image, dtype=np.int64)).astype(np.float64)
    except OSError as exc:
        raise BundleFormatError(f"Could not read graymap {path}: {exc}") from exc


def write_slm_rgb(amplitude: np.ndarray, phase: np.ndarray, path: PathLike) -> Path:
    """Two-channel SLM pixmap: blue carries amplitude levels, green phase levels."""
    amplitude = np.asarray(amplitude, dtype=np.uint8)
    phase = np.asarray(phase, dtype=np.uint8)
    if amplitude.shape != phase.shape:
        raise InvalidArgumentError(f"SLM channels differ in shape: {amplitude.shape} vs {phase.shape}")
    rgb = np.stack([np.zeros_like(amplitude), phase, amplitude], axis=-1)
    target = Path(path)
    try:
        Image.fromarray(np.ascontiguousarray(np.flipud(rgb))).save(target, format="PPM")
    except OSError as exc:
        raise BundleFormatError(f"Could not write SLM pattern {target}: {exc}") from exc
    return target


def read_slm_rgb(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of `write_slm_rgb`: (amplitude levels, phase levels)."""
    try:
        with Image.open(path) as image:
            rgb = np.flipud(np.asarray(image.convert("RGB"), dtype=np.uint8))
    except OSError as exc:
        raise BundleFormatError(f"Could not read SLM pattern {path}: {exc}") from exc
    return rgb[..., 2].copy(), rgb[..., 1].copy()
