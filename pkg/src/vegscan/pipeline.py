"""Analysis orchestration: ingest -> mask -> NDVI -> composite -> threshold
-> area -> series, plus the composite cache and the export store.

The composite over a (sensor, date range, cloud cap, ROI bounds) window is
independent of the NDVI thresholds and of the ROI's interior shape, so it is
cached under exactly that key: moving a threshold slider re-runs only the
threshold/area stage. Cache hits are counted and observable.

Analysis ids are stable hashes of the canonicalized request, never wall
clock, so identical requests are idempotent and results byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

from .analytics import (
    AreaReport,
    TimeSeriesPoint,
    SceneNdvi,
    masked_area_km2,
    pixel_area_grid,
    time_series,
)
from .errors import (
    PixelBudgetExceeded,
    UnknownAnalysis,
    UnknownDataset,
    ValidationFailed,
)
from .ingest import ExportRecord, ManifestEntry, SceneManifest, export_composite, load_scenes
from .masking import apply_mask, qa_pixel_mask, scale_reflectance, scheme_for, scl_clear_mask
from .ndvi import NdviComposite, median_composite, ndvi_scene, threshold_mask
from .raster import BoundingBox, RasterGrid, Scene, crop, require_same_geometry
from .roi import Roi, VectorDataset, list_children, rasterize_roi, resolve_admin_roi
from .sensors import (
    AnalysisParams,
    SensorSpec,
    ValidationReport,
    lookup_sensor,
    validate_params,
)

DEFAULT_PIXEL_BUDGET = 25_000_000
PIXEL_BUDGET_ENV = "VEGSCAN_PIXEL_BUDGET"
CACHE_DIR_ENV = "VEGSCAN_CACHE_DIR"

WARN_PIXEL_CENTER = (
    "Areas use pixel-center membership: each pixel counts fully in or out, "
    "with no fractional weighting of boundary pixels."
)
WARN_SPHERICAL = (
    "Geographic pixel areas use a spherical earth model with the authalic "
    "radius; deviation from ellipsoidal areas is below 0.3 percent."
)


class SceneSource(Protocol):
    """Where scenes come from: a local manifest or a remote catalog."""

    def find(
        self,
        spec: SensorSpec,
        bbox: BoundingBox,
        start: date,
        end: date,
        max_cloud_pct: float,
    ) -> list[ManifestEntry]: ...

    def load(
        self, entries: Sequence[ManifestEntry], spec: SensorSpec, workers: int
    ) -> list[Scene]: ...

    def fingerprint(self) -> str: ...


class ManifestSource:
    """Scene source backed by a local manifest file."""

    def __init__(
        self,
        manifest: SceneManifest,
        fetcher: Callable[[str], Path] | None = None,
    ):
        from .ingest import filter_scenes

        self._manifest = manifest
        self._fetcher = fetcher
        self._filter = filter_scenes
        canonical = json.dumps(
            [e.to_dict() for e in manifest.entries], sort_keys=True
        )
        self._fingerprint = "manifest:" + hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def find(self, spec, bbox, start, end, max_cloud_pct):
        return self._filter(self._manifest, bbox, start, end, max_cloud_pct)

    def load(self, entries, spec, workers):
        return load_scenes(
            entries,
            spec,
            base_dir=self._manifest.base_dir,
            fetcher=self._fetcher,
            workers=workers,
        )

    def fingerprint(self):
        return self._fingerprint


class StacSource:
    """Scene source backed by a remote STAC endpoint with a download cache."""

    def __init__(self, endpoint: str, cache_dir: str | Path, **cache_kwargs):
        from .stac import DownloadCache, stac_search

        self.endpoint = endpoint
        self.cache = DownloadCache(cache_dir, **cache_kwargs)
        self._search = stac_search

    def find(self, spec, bbox, start, end, max_cloud_pct):
        manifest = self._search(self.endpoint, spec, bbox, start, end, max_cloud_pct)
        return list(manifest.entries)

    def load(self, entries, spec, workers):
        return load_scenes(
            entries, spec, fetcher=self.cache.fetcher(), workers=workers
        )

    def fingerprint(self):
        return "stac:" + self.endpoint


@dataclass(frozen=True)
class AnalysisRequest:
    params: AnalysisParams
    roi: Roi

    def canonical(self, source_fingerprint: str) -> dict:
        p = self.params
        return {
            "sensor_id": p.sensor_id,
            "start_date": p.start_date.isoformat(),
            "end_date": p.end_date.isoformat(),
            "ndvi_min": float(p.ndvi_min),
            "ndvi_max": float(p.ndvi_max),
            "max_cloud_pct": float(p.max_cloud_pct),
            "roi_rings": [ring.tolist() for ring in self.roi.rings],
            "roi_crs": str(self.roi.crs),
            "source": source_fingerprint,
        }

    def analysis_id(self, source_fingerprint: str) -> str:
        payload = json.dumps(
            self.canonical(source_fingerprint),
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class AnalysisResult:
    outcome: str  # always "ok"
    analysis_id: str
    area: AreaReport
    scene_count: int
    series: tuple[TimeSeriesPoint, ...]
    composite_ref: str
    mask_ref: str
    scale_m: float
    params_echo: dict
    warnings: tuple[str, ...]
    composite_cache_hit: bool

    def to_dict(self) -> dict:
        # The cache-hit flag stays out of the document on purpose: repeated
        # identical requests must serialize byte-identically, and cache
        # behavior is observable through the engine's counters instead.
        return {
            "outcome": self.outcome,
            "analysis_id": self.analysis_id,
            "area": self.area.to_dict(),
            "scene_count": self.scene_count,
            "series": [p.to_dict() for p in self.series],
            "composite_ref": self.composite_ref,
            "mask_ref": self.mask_ref,
            "scale_m": self.scale_m,
            "params": self.params_echo,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class NoScenesResult:
    outcome: str  # always "no_scenes"
    analysis_id: str
    scene_count: int
    message: str
    params_echo: dict

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "analysis_id": self.analysis_id,
            "scene_count": self.scene_count,
            "message": self.message,
            "params": self.params_echo,
        }


@dataclass
class _CachedComposite:
    composite: NdviComposite
    scene_ndvis: tuple[SceneNdvi, ...]


class CompositeCache:
    """LRU cache of composites keyed by the composite-determining inputs.

    Thread-safe; a race between two identical misses may compute twice but
    never corrupts the cache. ``hits``/``misses`` exist so reuse is testable.
    """

    def __init__(self, capacity: int = 8):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self._capacity = capacity
        self._items: OrderedDict[tuple, _CachedComposite] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: tuple) -> _CachedComposite | None:
        with self._lock:
            found = self._items.get(key)
            if found is None:
                self.misses += 1
                return None
            self._items.move_to_end(key)
            self.hits += 1
            return found

    def put(self, key: tuple, value: _CachedComposite) -> None:
        with self._lock:
            self._items[key] = value
            self._items.move_to_end(key)
            while len(self._items) > self._capacity:
                self._items.popitem(last=False)


class ExportStore:
    """Exported GeoTIFF pairs under ``root/<analysis_id>/``, LRU-bounded.

    Each directory carries a small record file so a fresh process pointed
    at the same root can serve earlier exports. Eviction deletes the
    directory; a later fetch of that id raises UnknownAnalysis so callers
    can tell users to re-run the analysis.
    """

    def __init__(self, root: str | Path, capacity: int = 32):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._capacity = capacity
        self._records: OrderedDict[str, ExportRecord] = OrderedDict()
        self._lock = threading.Lock()
        self._rescan()

    def _rescan(self) -> None:
        found = []
        for record_path in self.root.glob("*/record.json"):
            try:
                doc = json.loads(record_path.read_text())
                record = ExportRecord(
                    composite_path=Path(doc["composite_path"]),
                    mask_path=Path(doc["mask_path"]),
                    scale_m=float(doc["scale_m"]),
                    crs=str(doc["crs"]),
                )
            except (OSError, ValueError, KeyError):
                continue
            if record.composite_path.exists() and record.mask_path.exists():
                found.append(
                    (record_path.stat().st_mtime, record_path.parent.name, record)
                )
        for _, analysis_id, record in sorted(found):
            self._records[analysis_id] = record

    def put(
        self,
        analysis_id: str,
        composite_grid: RasterGrid,
        mask_grid: RasterGrid,
        scale_m: float,
    ) -> ExportRecord:
        record = export_composite(
            composite_grid, mask_grid, self.root / analysis_id, scale_m
        )
        record_path = self.root / analysis_id / "record.json"
        record_path.write_text(json.dumps(record.to_dict(), indent=2) + "\n")
        with self._lock:
            self._records[analysis_id] = record
            self._records.move_to_end(analysis_id)
            while len(self._records) > self._capacity:
                stale_id, stale = self._records.popitem(last=False)
                stale.composite_path.unlink(missing_ok=True)
                stale.mask_path.unlink(missing_ok=True)
                (self.root / stale_id / "record.json").unlink(missing_ok=True)
                try:
                    stale.composite_path.parent.rmdir()
                except OSError:
                    pass
        return record

    def get(self, analysis_id: str, kind: str) -> Path:
        with self._lock:
            record = self._records.get(analysis_id)
            if record is not None:
                self._records.move_to_end(analysis_id)
        if record is None:
            raise UnknownAnalysis(
                f"no stored result for analysis {analysis_id!r}; re-run the analysis"
            )
        if kind == "composite":
            return record.composite_path
        if kind == "mask":
            return record.mask_path
        raise UnknownAnalysis(f"unknown export kind {kind!r}")


def preprocess_scene(scene: Scene, spec: SensorSpec, window: BoundingBox) -> SceneNdvi:
    """One scene's masked NDVI over the analysis window."""
    red = crop(scene.band(spec.red_band), window)
    nir = crop(scene.band(spec.nir_band), window)
    qa = crop(scene.band(spec.qa_band), window)

    scheme = scheme_for(spec)
    if scheme.scheme_id == "SCL":
        clear = scl_clear_mask(qa)
    else:
        clear = qa_pixel_mask(qa, scheme)

    ndvi = ndvi_scene(scale_reflectance(red, spec), scale_reflectance(nir, spec))
    return SceneNdvi(
        scene_id=scene.scene_id,
        timestamp=scene.timestamp,
        ndvi=apply_mask(ndvi, clear),
    )


class AnalysisEngine:
    """Thread-safe facade the HTTP service and the CLI both drive."""

    def __init__(
        self,
        source: SceneSource,
        *,
        pixel_budget: int | None = None,
        tile_rows: int | None = None,
        workers: int = 1,
        export_dir: str | Path | None = None,
        cache_capacity: int = 8,
        export_capacity: int = 32,
        today: date | None = None,
    ):
        self.source = source
        if pixel_budget is None:
            pixel_budget = int(os.environ.get(PIXEL_BUDGET_ENV, DEFAULT_PIXEL_BUDGET))
        if pixel_budget < 1:
            raise ValueError("pixel budget must be positive")
        self.pixel_budget = pixel_budget
        self.tile_rows = tile_rows
        self.workers = workers
        if export_dir is None:
            base = os.environ.get(CACHE_DIR_ENV)
            if base is None:
                import tempfile

                base = Path(tempfile.mkdtemp(prefix="vegscan-"))
            export_dir = Path(base) / "exports"
        self.exports = ExportStore(export_dir, capacity=export_capacity)
        self.composites = CompositeCache(capacity=cache_capacity)
        self.datasets: dict[str, VectorDataset] = {}
        self.today = today

    # -- datasets ---------------------------------------------------------

    def register_dataset(self, name: str, dataset: VectorDataset) -> None:
        self.datasets[name] = dataset

    def dataset(self, name: str) -> VectorDataset:
        try:
            return self.datasets[name]
        except KeyError:
            raise UnknownDataset(f"no dataset named {name!r}") from None

    def dataset_children(self, name: str, path: Sequence[str]) -> list[str]:
        return list_children(self.dataset(name), path)

    def dataset_roi(self, name: str, path: Sequence[str]) -> Roi:
        return resolve_admin_roi(self.dataset(name), path)

    # -- validation -------------------------------------------------------

    def validate(
        self, params: AnalysisParams, roi_defined: bool
    ) -> ValidationReport:
        try:
            spec = lookup_sensor(params.sensor_id)
        except Exception:
            spec = None
        return validate_params(params, spec, roi_defined, today=self.today)

    # -- analysis ---------------------------------------------------------

    def _budget_pixels(self, roi: Roi, spec: SensorSpec) -> int:
        b = roi.bounds()
        cols = max(1, math.ceil((b.maxx - b.minx) / spec.native_scale_m))
        rows = max(1, math.ceil((b.maxy - b.miny) / spec.native_scale_m))
        return cols * rows

    def _composite_key(self, spec: SensorSpec, request: AnalysisRequest) -> tuple:
        p = request.params
        b = request.roi.bounds()
        return (
            self.source.fingerprint(),
            spec.sensor_id,
            p.start_date.isoformat(),
            p.end_date.isoformat(),
            float(p.max_cloud_pct),
            (b.minx, b.miny, b.maxx, b.maxy),
            str(request.roi.crs),
        )

    def _build_composite(
        self,
        spec: SensorSpec,
        entries: Sequence[ManifestEntry],
        window: BoundingBox,
        date_range: tuple[date, date],
    ) -> _CachedComposite:
        scenes = self.source.load(entries, spec, self.workers)
        scene_ndvis = tuple(preprocess_scene(s, spec, window) for s in scenes)
        require_same_geometry(*(s.ndvi for s in scene_ndvis))
        grid = median_composite(
            [s.ndvi for s in scene_ndvis],
            tile_rows=self.tile_rows,
            workers=self.workers,
        )
        composite = NdviComposite(
            grid=grid,
            scene_count=len(scene_ndvis),
            date_range=date_range,
            sensor_id=spec.sensor_id,
        )
        return _CachedComposite(composite, scene_ndvis)

    def analyze(self, request: AnalysisRequest) -> AnalysisResult | NoScenesResult:
        params = request.params
        report = self.validate(params, roi_defined=True)
        if not report.ok:
            raise ValidationFailed(report)
        spec = lookup_sensor(params.sensor_id)

        requested = self._budget_pixels(request.roi, spec)
        if requested > self.pixel_budget:
            raise PixelBudgetExceeded(requested, self.pixel_budget)

        analysis_id = request.analysis_id(self.source.fingerprint())
        params_echo = request.canonical(self.source.fingerprint())
        params_echo["roi_label"] = request.roi.label

        window = request.roi.bounds()
        entries = self.source.find(
            spec, window, params.start_date, params.end_date, params.max_cloud_pct
        )
        if not entries:
            return NoScenesResult(
                outcome="no_scenes",
                analysis_id=analysis_id,
                scene_count=0,
                message=(
                    "no scenes match the date window, cloud ceiling, and region; "
                    "widen the search instead of treating the area as zero"
                ),
                params_echo=params_echo,
            )

        key = self._composite_key(spec, request)
        cached = self.composites.get(key)
        cache_hit = cached is not None
        if cached is None:
            cached = self._build_composite(
                spec, entries, window, (params.start_date, params.end_date)
            )
            self.composites.put(key, cached)

        grid = cached.composite.grid
        mask = threshold_mask(grid, params.ndvi_min, params.ndvi_max)
        roi_mask = rasterize_roi(request.roi, grid.transform, grid.width, grid.height)
        areas = pixel_area_grid(grid.transform, grid.width, grid.height)
        area = masked_area_km2(mask, roi_mask, areas)
        series = tuple(time_series(list(cached.scene_ndvis), roi_mask))

        selected = mask.grid.valid & roi_mask.values.astype(bool)
        export_mask = RasterGrid(
            np.where(selected, 1, 0).astype(np.uint8), selected, grid.transform
        )
        self.exports.put(analysis_id, grid, export_mask, spec.native_scale_m)

        warnings = [WARN_PIXEL_CENTER]
        if grid.crs.is_geographic:
            warnings.append(WARN_SPHERICAL)

        return AnalysisResult(
            outcome="ok",
            analysis_id=analysis_id,
            area=area,
            scene_count=cached.composite.scene_count,
            series=series,
            composite_ref=f"/export/{analysis_id}/composite",
            mask_ref=f"/export/{analysis_id}/mask",
            scale_m=spec.native_scale_m,
            params_echo=params_echo,
            warnings=tuple(warnings),
            composite_cache_hit=cache_hit,
        )

    def export_path(self, analysis_id: str, kind: str) -> Path:
        return self.exports.get(analysis_id, kind)
