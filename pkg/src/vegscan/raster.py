"""Georeferenced grid data model.

Grids are immutable after construction (the backing numpy arrays are set
read-only) so they can be shared freely across threads. All pipeline stages
consume and produce :class:`RasterGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .errors import EmptyRegion, GridMismatch


class BoundingBox(NamedTuple):
    minx: float
    miny: float
    maxx: float
    maxy: float

    def intersects(self, other: "BoundingBox") -> bool:
        return (
            self.minx <= other.maxx
            and other.minx <= self.maxx
            and self.miny <= other.maxy
            and other.miny <= self.maxy
        )


@dataclass(frozen=True)
class Crs:
    """Either geographic WGS84 or a projected metric system, keyed by EPSG."""

    kind: str  # "geographic" | "projected"
    epsg: int

    def __post_init__(self):
        if self.kind not in ("geographic", "projected"):
            raise ValueError(f"unknown CRS kind: {self.kind!r}")

    @classmethod
    def geographic(cls) -> "Crs":
        return cls("geographic", 4326)

    @classmethod
    def projected(cls, epsg: int) -> "Crs":
        return cls("projected", epsg)

    @classmethod
    def from_string(cls, text: str) -> "Crs":
        """Parse ``EPSG:nnnn``; 4326 maps to geographic, others to projected."""
        text = text.strip().upper()
        if not text.startswith("EPSG:"):
            raise ValueError(f"expected 'EPSG:<code>', got {text!r}")
        epsg = int(text.split(":", 1)[1])
        return cls.geographic() if epsg == 4326 else cls.projected(epsg)

    @property
    def is_geographic(self) -> bool:
        return self.kind == "geographic"

    def __str__(self) -> str:
        return f"EPSG:{self.epsg}"


@dataclass(frozen=True)
class GeoTransform:
    """Axis-aligned affine mapping from pixel indices to CRS coordinates.

    ``origin_x``/``origin_y`` locate the outer corner of pixel (0, 0);
    ``pixel_height`` is negative for north-up grids. Rotation terms are not
    representable by design: rotated rasters are rejected at ingest.
    """

    origin_x: float
    origin_y: float
    pixel_width: float
    pixel_height: float
    crs: Crs

    def __post_init__(self):
        if not self.pixel_width > 0:
            raise ValueError("pixel_width must be > 0")
        if self.pixel_height == 0:
            raise ValueError("pixel_height must be nonzero")

    def pixel_center(self, col: int, row: int) -> tuple[float, float]:
        x = self.origin_x + (col + 0.5) * self.pixel_width
        y = self.origin_y + (row + 0.5) * self.pixel_height
        return x, y

    def bounds(self, width: int, height: int) -> BoundingBox:
        x0 = self.origin_x
        x1 = self.origin_x + width * self.pixel_width
        y0 = self.origin_y
        y1 = self.origin_y + height * self.pixel_height
        return BoundingBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    def shifted(self, col_off: int, row_off: int) -> "GeoTransform":
        """Transform of a subgrid whose (0,0) is at (col_off, row_off)."""
        return GeoTransform(
            origin_x=self.origin_x + col_off * self.pixel_width,
            origin_y=self.origin_y + row_off * self.pixel_height,
            pixel_width=self.pixel_width,
            pixel_height=self.pixel_height,
            crs=self.crs,
        )


class RasterGrid:
    """2-D value array with a validity mask and a geotransform.

    A pixel with ``valid == False`` contributes to no statistic, composite,
    or area sum anywhere downstream.
    """

    __slots__ = ("values", "valid", "transform")

    def __init__(self, values: np.ndarray, valid: np.ndarray, transform: GeoTransform):
        values = np.asarray(values)
        valid = np.asarray(valid, dtype=bool)
        if values.ndim != 2:
            raise ValueError("values must be 2-D")
        if values.shape != valid.shape:
            raise ValueError(
                f"values shape {values.shape} != valid shape {valid.shape}"
            )
        values = values.copy()
        valid = valid.copy()
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "transform", transform)

    def __setattr__(self, name, value):
        raise AttributeError("RasterGrid is immutable")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def crs(self) -> Crs:
        return self.transform.crs

    def bounds(self) -> BoundingBox:
        return self.transform.bounds(self.width, self.height)

    @classmethod
    def filled(
        cls,
        value,
        width: int,
        height: int,
        transform: GeoTransform,
        dtype=np.float32,
    ) -> "RasterGrid":
        vals = np.full((height, width), value, dtype=dtype)
        return cls(vals, np.ones((height, width), dtype=bool), transform)

    def with_values(self, values: np.ndarray) -> "RasterGrid":
        return RasterGrid(values, self.valid, self.transform)

    def with_valid(self, valid: np.ndarray) -> "RasterGrid":
        return RasterGrid(self.values, valid, self.transform)

    def same_geometry(self, other: "RasterGrid") -> bool:
        return self.shape == other.shape and self.transform == other.transform

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterGrid):
            return NotImplemented
        return (
            self.transform == other.transform
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(
                self.values[self.valid], other.values[other.valid], equal_nan=True
            )
        )

    def __repr__(self) -> str:
        return (
            f"RasterGrid({self.width}x{self.height}, {self.values.dtype}, "
            f"{self.crs}, {int(self.valid.sum())} valid)"
        )


def require_same_geometry(*grids: RasterGrid) -> None:
    first = grids[0]
    for g in grids[1:]:
        if g.shape != first.shape:
            raise GridMismatch(f"grid shapes differ: {first.shape} vs {g.shape}")
        if g.transform != first.transform:
            raise GridMismatch("grid transforms differ")


def crop(grid: RasterGrid, bbox: BoundingBox) -> RasterGrid:
    """Cut the grid down to the pixels intersecting ``bbox``.

    The output origin shifts by a whole number of pixels; surviving pixels
    keep their values, validity, and geographic position. No resampling.
    """
    t = grid.transform
    pw, ph = t.pixel_width, t.pixel_height
    col0 = math.floor((bbox.minx - t.origin_x) / pw)
    col1 = math.ceil((bbox.maxx - t.origin_x) / pw)
    # rows count down from the top edge (pixel_height < 0 for north-up)
    if ph < 0:
        row0 = math.floor((bbox.maxy - t.origin_y) / ph)
        row1 = math.ceil((bbox.miny - t.origin_y) / ph)
    else:
        row0 = math.floor((bbox.miny - t.origin_y) / ph)
        row1 = math.ceil((bbox.maxy - t.origin_y) / ph)
    col0 = max(col0, 0)
    row0 = max(row0, 0)
    col1 = min(col1, grid.width)
    row1 = min(row1, grid.height)
    if col0 >= col1 or row0 >= row1:
        raise EmptyRegion("crop window does not intersect the grid")
    return RasterGrid(
        grid.values[row0:row1, col0:col1],
        grid.valid[row0:row1, col0:col1],
        t.shifted(col0, row0),
    )


def iter_row_blocks(height: int, block_rows: int | None) -> Iterator[tuple[int, int]]:
    """Yield (start, stop) row ranges; one full-height block when untiled."""
    if block_rows is None or block_rows >= height:
        yield 0, height
        return
    if block_rows < 1:
        raise ValueError("block_rows must be >= 1")
    for start in range(0, height, block_rows):
        yield start, min(start + block_rows, height)


class Scene:
    """One satellite acquisition: metadata plus its band grids.

    All bands must share dimensions and transform; this is checked at
    construction so downstream code can rely on alignment.
    """

    __slots__ = ("scene_id", "sensor_id", "timestamp", "cloud_cover_pct", "bands")

    def __init__(
        self,
        scene_id: str,
        sensor_id: str,
        timestamp: date,
        cloud_cover_pct: float,
        bands: Mapping[str, RasterGrid],
    ):
        if not 0 <= cloud_cover_pct <= 100:
            raise ValueError(f"cloud_cover_pct {cloud_cover_pct} outside [0, 100]")
        if not bands:
            raise ValueError("scene has no bands")
        grids = list(bands.values())
        require_same_geometry(*grids)
        self.scene_id = scene_id
        self.sensor_id = sensor_id
        self.timestamp = timestamp
        self.cloud_cover_pct = cloud_cover_pct
        self.bands = dict(bands)

    def band(self, label: str) -> RasterGrid:
        from .errors import BandNotFound

        try:
            return self.bands[label]
        except KeyError:
            raise BandNotFound(
                f"scene {self.scene_id} has no band {label!r}"
            ) from None

    @property
    def transform(self) -> GeoTransform:
        return next(iter(self.bands.values())).transform
