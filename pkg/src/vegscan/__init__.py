"""Vegetation index analysis over satellite imagery.

The package turns manifests or STAC catalogs of Sentinel-2/Landsat scenes
into cloud-free median NDVI composites, thresholds them into vegetation
masks, and reports areas and per-scene statistics for a polygonal region,
via a library API, a CLI, and an HTTP gateway.
"""

from .analytics import (
    AreaReport,
    SceneNdvi,
    TimeSeriesPoint,
    masked_area_km2,
    mean_ndvi,
    pixel_area_grid,
    time_series,
    time_series_csv,
)
from .errors import (
    BandNotFound,
    CrsMismatch,
    DegenerateGeometry,
    EmptyRegion,
    EmptyStack,
    GridMismatch,
    InvalidRing,
    ManifestError,
    NoSuchUnit,
    PixelBudgetExceeded,
    ProtocolError,
    RasterIOError,
    TransportError,
    UnknownAnalysis,
    UnknownDataset,
    UnknownSensor,
    UnsupportedGeometry,
    ValidationFailed,
    VegscanError,
)
from .geotiff import read_geotiff, write_geotiff
from .ingest import (
    ExportRecord,
    ManifestEntry,
    SceneManifest,
    export_composite,
    filter_scenes,
    load_manifest,
    load_scene,
    load_scenes,
)
from .masking import (
    MASK_SCHEMES,
    SCL_KEEP_CLASSES,
    apply_mask,
    qa_pixel_mask,
    scale_reflectance,
    scheme_for,
    scl_clear_mask,
)
from .ndvi import (
    NdviComposite,
    ThresholdMask,
    median_composite,
    ndvi_scene,
    threshold_mask,
)
from .pipeline import (
    AnalysisEngine,
    AnalysisRequest,
    AnalysisResult,
    ManifestSource,
    NoScenesResult,
    StacSource,
)
from .raster import (
    BoundingBox,
    Crs,
    GeoTransform,
    RasterGrid,
    Scene,
    crop,
    require_same_geometry,
)
from .roi import (
    Roi,
    VectorDataset,
    list_children,
    list_protected_areas,
    load_roi_geojson,
    load_vector_dataset,
    rasterize_roi,
    resolve_admin_roi,
    resolve_protected_area_roi,
    roi_from_bbox,
    roi_from_polygon,
)
from .sensors import (
    SENSOR_REGISTRY,
    AnalysisParams,
    SensorSpec,
    ValidationReport,
    Violation,
    lookup_sensor,
    registry_document,
    validate_params,
)
from .stac import DownloadCache, StacQuery, stac_search

__version__ = "1.0.0"
