"""Regions of interest: construction, spec parsing and quadrature weights."""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from models import Grid, RegionOfInterest, RoiShape
from utils.errors import GridMismatchError, InvalidArgumentError
from utils.helpers import parse_length, parse_range, parse_spec_string

logger = logging.getLogger(__name__)


def disk(radius: float, center: Tuple[float, float] = (0.0, 0.0), grid: Optional[Grid] = None) -> RegionOfInterest:
    """Disk of radius `radius` about `center`."""
    return RegionOfInterest(shape=RoiShape.DISK, radius=radius, center=center, grid=grid)


def annulus(
    inner_radius: float,
    outer_radius: float,
    center: Tuple[float, float] = (0.0, 0.0),
    grid: Optional[Grid] = None,
) -> RegionOfInterest:
    """Annulus inner_radius < rho <= outer_radius (the center sample is included when inner_radius = 0)."""
    return RegionOfInterest(
        shape=RoiShape.ANNULUS, inner_radius=inner_radius, outer_radius=outer_radius, center=center, grid=grid
    )


def rectangle(
    width: Optional[float] = None,
    height: Optional[float] = None,
    center: Tuple[float, float] = (0.0, 0.0),
    grid: Optional[Grid] = None,
) -> RegionOfInterest:
    """Axis-aligned rectangle; omitted extents span the whole grid."""
    return RegionOfInterest(shape=RoiShape.RECTANGLE, width=width, height=height, center=center, grid=grid)


def full_plane(grid: Optional[Grid] = None) -> RegionOfInterest:
    return rectangle(grid=grid)


def volume(section: RegionOfInterest, z_planes: Sequence[float]) -> RegionOfInterest:
    """Stack of the planar `section` on strictly increasing planes."""
    return RegionOfInterest(
        shape=RoiShape.VOLUME,
        section=section,
        z_planes=[float(z) for z in z_planes],
        center=section.center,
        grid=section.grid,
    )


def plane_pair(section: RegionOfInterest, z_lower: float, z_upper: float) -> RegionOfInterest:
    """Two parallel planes bracketing a scatterer; outward normals -e_z (lower) and +e_z (upper)."""
    return volume(section, [z_lower, z_upper])


def roi_center(roi: RegionOfInterest) -> Tuple[float, ...]:
    """Kernel center r0: (cx, cy) for planar regions, (cx, cy, z_center) for volumes."""
    cx, cy = roi.center
    if roi.is_volume:
        return (cx, cy, roi.z_center)
    return (cx, cy)


def _check_grid(roi: RegionOfInterest, grid: Optional[Grid]) -> Grid:
    bound = roi.grid if roi.grid is not None else (roi.section.grid if roi.is_volume else None)
    if grid is None:
        if bound is None:
            raise InvalidArgumentError(f"ROI {roi.describe()} is not bound to a grid and none was given")
        return bound
    if bound is not None and not bound.same_geometry(grid):
        raise GridMismatchError(f"ROI {roi.describe()} was declared on a different grid")
    return grid


def planar_membership(roi: RegionOfInterest, grid: Grid) -> np.ndarray:
    """Boolean sample-center membership of a planar region."""
    planar = roi.planar
    shape = RoiShape(planar.shape)
    X, Y = grid.mesh()
    cx, cy = planar.center
    rho_sq = (X - cx) ** 2 + (Y - cy) ** 2

    if shape == RoiShape.DISK:
        return rho_sq <= planar.radius ** 2
    if shape == RoiShape.ANNULUS:
        inside = rho_sq <= planar.outer_radius ** 2
        if planar.inner_radius == 0:
            return inside
        return inside & (rho_sq > planar.inner_radius ** 2)
    if shape == RoiShape.RECTANGLE:
        mask = np.ones(grid.shape, dtype=bool)
        if planar.width is not None:
            mask &= np.abs(X - cx) <= planar.width / 2
        if planar.height is not None:
            mask &= np.abs(Y - cy) <= planar.height / 2
        return mask
    raise InvalidArgumentError(f"Unsupported ROI shape: {planar.shape}")


def plane_weights(roi: RegionOfInterest, grid: Optional[Grid] = None) -> np.ndarray:
    """dx*dy weights of the planar section, shape (ny, nx)."""
    grid = _check_grid(roi, grid)
    return planar_membership(roi, grid) * grid.cell_area


def plane_spacing(roi: RegionOfInterest) -> np.ndarray:
    """dz per plane of a volume; uniform spacing is assumed."""
    return np.gradient(np.asarray(roi.z_planes, dtype=np.float64))


def roi_mask(roi: RegionOfInterest, grid: Optional[Grid] = None) -> np.ndarray:
    """
    Quadrature weights of a region of interest.

    Args:
        roi: Region of interest
        grid: Sampling grid, defaults to the grid the region is bound to

    Returns:
        dx*dy per member sample (shape (ny, nx)) for planar regions, or
        dx*dy*dz per member sample (shape (nz, ny, nx)) for volumes
    """
    weights = plane_weights(roi, grid)
    if not roi.is_volume:
        return weights
    dz = plane_spacing(roi)
    return dz[:, None, None] * weights[None, :, :]


def integrate(roi: RegionOfInterest, integrand: np.ndarray, grid: Optional[Grid] = None):
    """
    Weighted sum of `integrand` over the region.

    Returns:
        Real or complex scalar, following the integrand's dtype
    """
    weights = roi_mask(roi, grid)
    samples = np.asarray(integrand)
    if samples.shape != weights.shape:
        raise InvalidArgumentError(f"Integrand shape {samples.shape} does not match ROI weights {weights.shape}")
    total = np.sum(weights * samples)
    return complex(total) if np.iscomplexobj(total) else float(total)


def parse_roi_spec(
    spec: str,
    units: Optional[Dict[str, float]] = None,
    default_scale: float = 1.0,
    grid: Optional[Grid] = None,
) -> RegionOfInterest:
    """
    Build a region from text.

    Accepted forms: "disk:R=2", "annulus:Rin=1,Rout=2", "rect:W=4,H=2",
    "full", and "volume:R=1,z=-2..2:5" (section keys as for disk, annulus
    or rect). Every length may carry a unit token ("w0", "px", "lambda").
    Any form accepts "cx" and "cy".

    Args:
        spec: ROI spec string
        units: Unit token scales
        default_scale: Scale of bare numbers (e.g. metres to wavelengths)
        grid: Optional grid binding

    Returns:
        RegionOfInterest
    """
    name, raw = parse_spec_string(spec)

    def length(key: str, default: Optional[float] = None) -> Optional[float]:
        return parse_length(raw[key], units, default_scale) if key in raw else default

    center = (length("cx", 0.0), length("cy", 0.0))

    def planar_from_keys() -> RegionOfInterest:
        if "R" in raw:
            return disk(length("R"), center, grid)
        if "Rout" in raw:
            return annulus(length("Rin", 0.0), length("Rout"), center, grid)
        return rectangle(length("W"), length("H"), center, grid)

    if name == "disk":
        if "R" not in raw:
            raise InvalidArgumentError(f"Disk ROI needs R: {spec}")
        roi = disk(length("R"), center, grid)
    elif name == "annulus":
        if "Rout" not in raw:
            raise InvalidArgumentError(f"Annulus ROI needs Rout: {spec}")
        roi = annulus(length("Rin", 0.0), length("Rout"), center, grid)
    elif name in ("rect", "rectangle"):
        roi = rectangle(length("W"), length("H"), center, grid)
    elif name in ("full", "plane"):
        roi = full_plane(grid)
    elif name == "volume":
        if "z" not in raw:
            raise InvalidArgumentError(f"Volume ROI needs z=START..STOP:COUNT: {spec}")
        start, stop, count = parse_range(raw["z"], units, default_scale)
        roi = volume(planar_from_keys(), np.linspace(start, stop, count or 2))
    else:
        raise InvalidArgumentError(f"Unsupported ROI shape: {name}")

    logger.debug("Parsed ROI %s -> %s", spec, roi.describe())
    return roi


def with_radius(roi: RegionOfInterest, radius: float) -> RegionOfInterest:
    """Copy of a disk (or disk-section volume) with another radius."""
    planar = roi.planar
    if RoiShape(planar.shape) != RoiShape.DISK:
        raise InvalidArgumentError(f"Radius sweeps need a disk ROI, got {planar.shape}")
    section = disk(radius, planar.center, planar.grid)
    return volume(section, roi.z_planes) if roi.is_volume else section
