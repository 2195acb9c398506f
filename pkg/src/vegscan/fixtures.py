"""Deterministic demo dataset builders.

Everything here is synthetic but dimensionally realistic: a 32x32 UTM tile
at 10 m with three landcover blocks whose index values sit inside the
published interpretation bands (water/sand at or below 0.1, grassland and
shrub between 0.2 and 0.5, dense vegetation between 0.6 and 0.9), observed
by six scenes of varying cloud cover. Builders take a destination directory
and always produce byte-identical output for the same inputs, so exported
artifacts can be compared across runs.

Block layout (pixel indices, row-major from the north-west corner):

    grass  rows 0..31, cols 0..15   target index 0.35
    dense  rows 0..15, cols 16..31  target index 0.75
    water  rows 16..31, cols 16..31 target index 0.05

Per-scene offsets of -0.02, -0.01, +0.01, +0.02 on the four clear scenes
make the pixelwise median of any four-scene composite equal the block
target (mean of the two central values), while six-scene composites median
to the target as well (the two cloudy scenes carry offset 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .raster import Crs, GeoTransform, RasterGrid

GRID_WIDTH = 32
GRID_HEIGHT = 32
PIXEL_SIZE_M = 10.0
ORIGIN_X = 500_000.0
ORIGIN_Y = 2_600_000.0
EPSG_UTM = 32646

# Landcover block targets (see module docstring for the pixel extents).
GRASS_NDVI = 0.35
DENSE_NDVI = 0.75
WATER_NDVI = 0.05

# Red + NIR digital numbers always sum to this, so target = (n - r) / sum.
_DN_SUM = 8000

# ROI rectangle in map coordinates: covers pixel rows/cols 2..29 inclusive
# (28 x 28 = 784 pixel centers).
ROI_MIN_COL = 2
ROI_MAX_COL = 29
ROI_MIN_ROW = 2
ROI_MAX_ROW = 29

DemoScene = tuple[str, date, float, float]

# (scene_id, acquisition date, cloud %, index offset)
DEMO_SCENES: tuple[DemoScene, ...] = (
    ("S2A_T46QBK_20210105", date(2021, 1, 5), 0.0, -0.02),
    ("S2B_T46QBK_20210120", date(2021, 1, 20), 2.0, -0.01),
    ("S2A_T46QBK_20210204", date(2021, 2, 4), 5.0, +0.01),
    ("S2B_T46QBK_20210219", date(2021, 2, 19), 8.0, +0.02),
    ("S2A_T46QBK_20210306", date(2021, 3, 6), 40.0, 0.0),
    ("S2B_T46QBK_20210321", date(2021, 3, 21), 60.0, 0.0),
)

# SCL classes used by the fixture.
_SCL_VEGETATION = 4
_SCL_BARE = 5
_SCL_WATER = 6
_SCL_CLOUD_SHADOW = 3
_SCL_CLOUD_MEDIUM = 8
_SCL_CLOUD_HIGH = 9

# Per-scene cloudy patches as (row slice, col slice, scl class).
_CLOUD_PATCHES: dict[int, list[tuple[slice, slice, int]]] = {
    1: [(slice(4, 8), slice(4, 8), _SCL_CLOUD_HIGH)],
    2: [(slice(20, 24), slice(4, 8), _SCL_CLOUD_SHADOW)],
    3: [(slice(10, 14), slice(8, 12), _SCL_CLOUD_MEDIUM)],
    4: [(slice(0, 13), slice(0, 32), _SCL_CLOUD_HIGH)],
    5: [(slice(0, 20), slice(0, 32), _SCL_CLOUD_HIGH)],
}

# One pixel that is cloudy in every scene: composites must leave it invalid.
ALWAYS_CLOUDY_PIXEL = (0, 31)

# Two fill pixels in the first scene's red band (outside the demo ROI).
_NODATA_PIXELS = ((16, 0), (17, 0))


@dataclass(frozen=True)
class FixturePaths:
    root: Path
    manifest: Path
    roi: Path
    admin: Path
    protected_areas: Path
    scene_dir: Path


def demo_transform() -> GeoTransform:
    return GeoTransform(
        origin_x=ORIGIN_X,
        origin_y=ORIGIN_Y,
        pixel_width=PIXEL_SIZE_M,
        pixel_height=-PIXEL_SIZE_M,
        crs=Crs.projected(EPSG_UTM),
    )


def block_targets() -> np.ndarray:
    """Per-pixel target index values for the three landcover blocks."""
    t = np.full((GRID_HEIGHT, GRID_WIDTH), GRASS_NDVI, dtype=np.float64)
    t[:16, 16:] = DENSE_NDVI
    t[16:, 16:] = WATER_NDVI
    return t


def scene_bands(index: int) -> dict[str, RasterGrid]:
    """Red/NIR/SCL grids for one demo scene."""
    _, _, _, offset = DEMO_SCENES[index]
    transform = demo_transform()
    target = block_targets() + offset

    half_diff = np.rint(target * (_DN_SUM / 2)).astype(np.int64)
    red = (_DN_SUM // 2 - half_diff).astype(np.uint16)
    nir = (_DN_SUM // 2 + half_diff).astype(np.uint16)

    scl = np.full((GRID_HEIGHT, GRID_WIDTH), _SCL_VEGETATION, dtype=np.uint8)
    scl[16:, 16:] = _SCL_WATER
    scl[30:, :2] = _SCL_BARE
    for rows, cols, klass in _CLOUD_PATCHES.get(index, []):
        scl[rows, cols] = klass
    scl[ALWAYS_CLOUDY_PIXEL] = _SCL_CLOUD_HIGH

    valid = np.ones((GRID_HEIGHT, GRID_WIDTH), dtype=bool)
    if index == 0:
        for pixel in _NODATA_PIXELS:
            valid[pixel] = False
            red[pixel] = 0

    all_valid = np.ones_like(valid)
    return {
        "B4": RasterGrid(red, valid, transform),
        "B8": RasterGrid(nir, all_valid, transform),
        "SCL": RasterGrid(scl, all_valid, transform),
    }


def roi_geojson_document() -> dict:
    x0 = ORIGIN_X + ROI_MIN_COL * PIXEL_SIZE_M
    x1 = ORIGIN_X + (ROI_MAX_COL + 1) * PIXEL_SIZE_M
    y0 = ORIGIN_Y - (ROI_MAX_ROW + 1) * PIXEL_SIZE_M
    y1 = ORIGIN_Y - ROI_MIN_ROW * PIXEL_SIZE_M
    return {
        "type": "Feature",
        "crs": {
            "type": "name",
            "properties": {"name": f"urn:ogc:def:crs:EPSG::{EPSG_UTM}"},
        },
        "properties": {"name": "demo plot"},
        "geometry": {
            "type": "Polygon",
            "coordinates": [
                [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]
            ],
        },
    }


def _square(x0: float, y0: float, x1: float, y1: float) -> dict:
    return {
        "type": "Polygon",
        "coordinates": [[[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]],
    }


def admin_geojson_document() -> dict:
    """Two-country admin hierarchy keyed by ADM0_NAME/ADM1_NAME.

    Atlantis is a 3x2 degree rectangle fully partitioned by its three
    provinces; Eastshore is split across two disjoint features so dissolve
    behavior is observable.
    """

    def feat(country: str, province: str, geom: dict) -> dict:
        return {
            "type": "Feature",
            "properties": {"ADM0_NAME": country, "ADM1_NAME": province},
            "geometry": geom,
        }

    return {
        "type": "FeatureCollection",
        "features": [
            feat("Atlantis", "Northreach", _square(0.0, 1.0, 3.0, 2.0)),
            feat("Atlantis", "Westmarch", _square(0.0, 0.0, 1.5, 1.0)),
            feat("Atlantis", "Eastshore", _square(1.5, 0.0, 2.25, 1.0)),
            feat("Atlantis", "Eastshore", _square(2.25, 0.0, 3.0, 1.0)),
            feat("Borduria", "Kyle", _square(5.0, 0.0, 5.5, 1.0)),
            feat("Borduria", "Lorn", _square(5.5, 0.0, 6.0, 1.0)),
        ],
    }


def protected_areas_geojson_document() -> dict:
    """WDPA-shaped fixture keyed by ISO3/NAME."""

    def feat(iso3: str, name: str, geom: dict) -> dict:
        return {
            "type": "Feature",
            "properties": {"ISO3": iso3, "NAME": name},
            "geometry": geom,
        }

    return {
        "type": "FeatureCollection",
        "features": [
            feat(
                "BGD",
                "Lawachara National Park",
                _square(91.76, 24.30, 91.80, 24.34),
            ),
            feat(
                "BGD",
                "Teknaf Wildlife Sanctuary",
                _square(92.08, 20.95, 92.18, 21.15),
            ),
            feat("ATL", "Coral Shelf Reserve", _square(1.0, 0.2, 1.2, 0.4)),
        ],
    }


def build_demo_dataset(root: str | Path) -> FixturePaths:
    """Write the scene rasters, manifest, ROI, and vector fixtures."""
    from .geotiff import write_geotiff

    root = Path(root)
    scene_dir = root / "scenes"
    scene_dir.mkdir(parents=True, exist_ok=True)

    tile_bbox = list(demo_transform().bounds(GRID_WIDTH, GRID_HEIGHT))
    entries = []
    for index, (scene_id, day, cloud, _) in enumerate(DEMO_SCENES):
        bands = scene_bands(index)
        band_paths = {}
        for label, grid in bands.items():
            # 0 works as nodata for every band: DNs stay positive by
            # construction and SCL class 0 is itself the fill class
            filename = f"{scene_id}_{label}.tif"
            write_geotiff(grid, scene_dir / filename, nodata=0)
            band_paths[label] = f"scenes/{filename}"
        entries.append(
            {
                "scene_id": scene_id,
                "sensor_id": "Sentinel-2",
                "timestamp": day.isoformat(),
                "CLOUDY_PIXEL_PERCENTAGE": cloud,
                "bbox": tile_bbox,
                "band_paths": band_paths,
            }
        )

    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps({"scenes": entries}, indent=2) + "\n")

    roi_path = root / "roi.geojson"
    roi_path.write_text(json.dumps(roi_geojson_document(), indent=2) + "\n")

    admin_path = root / "admin.geojson"
    admin_path.write_text(json.dumps(admin_geojson_document(), indent=2) + "\n")

    pa_path = root / "protected_areas.geojson"
    pa_path.write_text(
        json.dumps(protected_areas_geojson_document(), indent=2) + "\n"
    )

    return FixturePaths(
        root=root,
        manifest=manifest_path,
        roi=roi_path,
        admin=admin_path,
        protected_areas=pa_path,
        scene_dir=scene_dir,
    )
