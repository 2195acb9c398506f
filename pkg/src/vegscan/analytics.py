"""Area quantification and mean-NDVI time series over a region of interest."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .errors import GridMismatch
from .ndvi import ThresholdMask
from .raster import GeoTransform, RasterGrid

# authalic sphere radius: same surface area as the WGS84 ellipsoid
AUTHALIC_RADIUS_M = 6_371_007.1809

PIXEL_AREA_PROJECTED = "projected-constant"
PIXEL_AREA_SPHERICAL = "spherical-per-row"


@dataclass(frozen=True)
class AreaReport:
    area_km2: float
    pixel_count: int
    pixel_area_basis: str
    crs: str

    def __post_init__(self):
        if (self.pixel_count == 0) != (self.area_km2 == 0):
            raise ValueError("area must be zero exactly when no pixels are counted")

    def to_dict(self) -> dict:
        return {
            "area_km2": self.area_km2,
            "pixel_count": self.pixel_count,
            "pixel_area_basis": self.pixel_area_basis,
            "crs": self.crs,
        }


@dataclass(frozen=True)
class TimeSeriesPoint:
    timestamp: date
    mean_ndvi: float | None
    valid_pixel_count: int
    scene_id: str

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp.isoformat(),
            "mean_ndvi": self.mean_ndvi,
            "valid_pixel_count": self.valid_pixel_count,
            "scene_id": self.scene_id,
        }


def _odd_sin(x: np.ndarray) -> np.ndarray:
    # force exact odd symmetry so rows at +lat and -lat get identical areas
    return np.sign(x) * np.sin(np.abs(x))


def pixel_area_grid(transform: GeoTransform, width: int, height: int) -> RasterGrid:
    """Per-pixel area in m², float64.

    Projected grids get the constant |pixel_width * pixel_height|;
    geographic grids get the spherical latitude-band area
    R^2 * dlon_rad * (sin(lat_top) - sin(lat_bottom)) on the authalic
    sphere, constant along each row.
    """
    if transform.crs.is_geographic:
        edges_deg = transform.origin_y + np.arange(height + 1) * transform.pixel_height
        sin_edges = _odd_sin(np.radians(edges_deg))
        band = np.abs(sin_edges[:-1] - sin_edges[1:])
        dlon = math.radians(abs(transform.pixel_width))
        row_areas = (AUTHALIC_RADIUS_M**2) * dlon * band
        values = np.repeat(row_areas[:, None], width, axis=1)
    else:
        const = abs(transform.pixel_width * transform.pixel_height)
        values = np.full((height, width), const, dtype=np.float64)
    return RasterGrid(values, np.ones((height, width), dtype=bool), transform)


def area_basis_for(transform: GeoTransform) -> str:
    return (
        PIXEL_AREA_SPHERICAL if transform.crs.is_geographic else PIXEL_AREA_PROJECTED
    )


def _exact_sum(values: np.ndarray) -> float:
    # math.fsum is exactly rounded, hence independent of traversal order
    return math.fsum(values.tolist())


def masked_area_km2(
    mask: ThresholdMask, roi_mask: RasterGrid, areas: RasterGrid
) -> AreaReport:
    """Sum pixel areas where the threshold mask and the ROI mask agree."""
    grid = mask.grid
    if not (grid.same_geometry(roi_mask) and grid.same_geometry(areas)):
        raise GridMismatch("mask, ROI mask, and area grids must align")
    selected = grid.valid & roi_mask.valid & roi_mask.values.astype(bool)
    count = int(selected.sum())
    area_m2 = _exact_sum(areas.values[selected]) if count else 0.0
    return AreaReport(
        area_km2=area_m2 / 1e6,
        pixel_count=count,
        pixel_area_basis=area_basis_for(grid.transform),
        crs=str(grid.crs),
    )


def mean_ndvi(ndvi: RasterGrid, roi_mask: RasterGrid) -> float | None:
    """Unweighted mean over pixels valid in both; None when there are none."""
    if not ndvi.same_geometry(roi_mask):
        raise GridMismatch("NDVI and ROI grids must align")
    selected = ndvi.valid & roi_mask.valid & roi_mask.values.astype(bool)
    count = int(selected.sum())
    if count == 0:
        return None
    return _exact_sum(ndvi.values[selected].astype(np.float64)) / count


@dataclass(frozen=True)
class SceneNdvi:
    """One preprocessed acquisition ready for statistics."""

    scene_id: str
    timestamp: date
    ndvi: RasterGrid


def time_series(
    scenes: Sequence[SceneNdvi], roi_mask: RasterGrid
) -> list[TimeSeriesPoint]:
    """One point per scene in timestamp order; fully masked scenes appear
    as points with an absent mean so charts can render gaps."""
    points = []
    for scene in sorted(scenes, key=lambda s: (s.timestamp, s.scene_id)):
        selected = scene.ndvi.valid & roi_mask.valid & roi_mask.values.astype(bool)
        count = int(selected.sum())
        mean = (
            _exact_sum(scene.ndvi.values[selected].astype(np.float64)) / count
            if count
            else None
        )
        points.append(TimeSeriesPoint(scene.timestamp, mean, count, scene.scene_id))
    return points


def time_series_csv(points: Sequence[TimeSeriesPoint]) -> str:
    """Delimited form: timestamp, mean_ndvi (empty for gaps), count, scene."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["timestamp", "mean_ndvi", "valid_pixel_count", "scene_id"])
    for p in points:
        mean = "" if p.mean_ndvi is None else repr(p.mean_ndvi)
        writer.writerow([p.timestamp.isoformat(), mean, p.valid_pixel_count, p.scene_id])
    return buf.getvalue()
