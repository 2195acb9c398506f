from datetime import date
from pathlib import Path

import numpy as np
import pytest

from vegscan.fixtures import FixturePaths, build_demo_dataset
from vegscan.ingest import load_manifest
from vegscan.pipeline import AnalysisEngine, ManifestSource
from vegscan.raster import Crs, GeoTransform, RasterGrid
from vegscan.roi import load_roi_geojson


def utm_transform(
    scale: float = 10.0,
    origin_x: float = 500_000.0,
    origin_y: float = 2_600_000.0,
    epsg: int = 32646,
) -> GeoTransform:
    return GeoTransform(
        origin_x=origin_x,
        origin_y=origin_y,
        pixel_width=scale,
        pixel_height=-scale,
        crs=Crs.projected(epsg),
    )


def grid_of(values, valid=None, transform=None) -> RasterGrid:
    values = np.asarray(values)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    if transform is None:
        transform = utm_transform()
    return RasterGrid(values, np.asarray(valid, dtype=bool), transform)


@pytest.fixture(scope="session")
def demo(tmp_path_factory) -> FixturePaths:
    return build_demo_dataset(tmp_path_factory.mktemp("demo"))


@pytest.fixture(scope="session")
def demo_manifest(demo):
    return load_manifest(demo.manifest)


@pytest.fixture(scope="session")
def demo_roi(demo):
    return load_roi_geojson(demo.roi)


@pytest.fixture
def engine(demo_manifest, tmp_path) -> AnalysisEngine:
    return AnalysisEngine(
        ManifestSource(demo_manifest), export_dir=tmp_path / "exports"
    )


@pytest.fixture
def demo_params():
    from vegscan.sensors import AnalysisParams

    return AnalysisParams(
        sensor_id="Sentinel-2",
        start_date=date(2021, 1, 1),
        end_date=date(2021, 3, 31),
        ndvi_min=-1.0,
        ndvi_max=1.0,
        max_cloud_pct=10.0,
    )
