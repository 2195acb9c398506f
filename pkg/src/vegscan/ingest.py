"""Scene discovery and loading from JSON manifests, plus raster export.

A manifest is either one JSON document ``{"scenes": [...]}`` or a file of
line-delimited JSON entries; both forms are hand-editable. Entries carry
scene_id, sensor_id, timestamp, cloud_cover_pct, bbox, and a map from band
label to file path (or URL, when backed by a remote catalog).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable, Sequence

from .errors import ManifestError
from .geotiff import read_geotiff, write_geotiff
from .raster import BoundingBox, RasterGrid, Scene
from .sensors import SensorSpec, lookup_sensor


@dataclass(frozen=True)
class ManifestEntry:
    scene_id: str
    sensor_id: str
    timestamp: date
    cloud_cover_pct: float
    bbox: BoundingBox
    band_paths: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "sensor_id": self.sensor_id,
            "timestamp": self.timestamp.isoformat(),
            "cloud_cover_pct": self.cloud_cover_pct,
            "bbox": list(self.bbox),
            "band_paths": dict(self.band_paths),
        }


@dataclass(frozen=True)
class SceneManifest:
    entries: tuple[ManifestEntry, ...]
    base_dir: Path | None = None

    def __len__(self) -> int:
        return len(self.entries)


def _parse_entry(raw: dict, index: int) -> ManifestEntry:
    try:
        sensor = lookup_sensor(raw["sensor_id"])
        # Cloud cover may appear under the normalized name or the source
        # catalog's own metadata key (CLOUDY_PIXEL_PERCENTAGE, CLOUD_COVER).
        if "cloud_cover_pct" in raw:
            cloud = raw["cloud_cover_pct"]
        else:
            cloud = raw[sensor.cloud_metadata_key]
        entry = ManifestEntry(
            scene_id=str(raw["scene_id"]),
            sensor_id=sensor.sensor_id,
            timestamp=date.fromisoformat(raw["timestamp"]),
            cloud_cover_pct=float(cloud),
            bbox=BoundingBox(*(float(v) for v in raw["bbox"])),
            band_paths={str(k): str(v) for k, v in raw["band_paths"].items()},
        )
    except ManifestError:
        raise
    except Exception as exc:
        raise ManifestError(f"entry {index}: {exc}", entry_index=index) from exc
    if not 0 <= entry.cloud_cover_pct <= 100:
        raise ManifestError(
            f"entry {index}: cloud_cover_pct {entry.cloud_cover_pct} outside [0, 100]",
            entry_index=index,
        )
    required = {sensor.red_band, sensor.nir_band, sensor.qa_band}
    missing = required - entry.band_paths.keys()
    if missing:
        raise ManifestError(
            f"entry {index} ({entry.scene_id}): missing band paths {sorted(missing)}",
            entry_index=index,
        )
    return entry


def manifest_from_dicts(
    raw_entries: Sequence[dict], base_dir: Path | None = None
) -> SceneManifest:
    entries = [_parse_entry(raw, i) for i, raw in enumerate(raw_entries)]
    seen: dict[str, int] = {}
    for i, entry in enumerate(entries):
        if entry.scene_id in seen:
            raise ManifestError(
                f"entry {i}: duplicate scene_id {entry.scene_id!r} "
                f"(first at entry {seen[entry.scene_id]})",
                entry_index=i,
            )
        seen[entry.scene_id] = i
    return SceneManifest(tuple(entries), base_dir)


def load_manifest(path: str | Path) -> SceneManifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    stripped = text.strip()
    if not stripped:
        raise ManifestError(f"manifest {path} is empty")
    raw_entries: list[dict]
    try:
        doc = json.loads(stripped)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "scenes" in doc:
        raw_entries = doc["scenes"]
    elif isinstance(doc, list):
        raw_entries = doc
    elif doc is None:
        # line-delimited form
        raw_entries = []
        for lineno, line in enumerate(stripped.splitlines()):
            line = line.strip()
            if not line:
                continue
            try:
                raw_entries.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ManifestError(
                    f"line {lineno + 1}: invalid JSON: {exc}", entry_index=lineno
                ) from exc
    else:
        raise ManifestError(f"manifest {path}: unrecognized JSON structure")
    return manifest_from_dicts(raw_entries, base_dir=path.parent)


def filter_scenes(
    manifest: SceneManifest,
    bbox: BoundingBox | None,
    start: date,
    end: date,
    max_cloud_pct: float,
) -> list[ManifestEntry]:
    """Entries intersecting the bbox, inside [start, end], at or under the
    cloud ceiling; always returned in timestamp order."""
    if start > end:
        raise ValueError("start date after end date")
    picked = [
        e
        for e in manifest.entries
        if start <= e.timestamp <= end
        and e.cloud_cover_pct <= max_cloud_pct
        and (bbox is None or e.bbox.intersects(bbox))
    ]
    picked.sort(key=lambda e: (e.timestamp, e.scene_id))
    return picked


def _resolve_band_path(
    entry: ManifestEntry,
    band: str,
    base_dir: Path | None,
    fetcher: Callable[[str], Path] | None,
) -> Path:
    ref = entry.band_paths[band]
    if ref.startswith(("http://", "https://")):
        if fetcher is None:
            raise ManifestError(
                f"scene {entry.scene_id}: band {band} is remote ({ref}) "
                "and no fetcher is configured"
            )
        return fetcher(ref)
    p = Path(ref)
    if not p.is_absolute() and base_dir is not None:
        p = base_dir / p
    return p


def load_scene(
    entry: ManifestEntry,
    spec: SensorSpec,
    base_dir: Path | None = None,
    fetcher: Callable[[str], Path] | None = None,
) -> Scene:
    """Read the sensor's red/NIR/QA bands for one manifest entry."""
    bands: dict[str, RasterGrid] = {}
    for label in (spec.red_band, spec.nir_band, spec.qa_band):
        path = _resolve_band_path(entry, label, base_dir, fetcher)
        bands[label] = read_geotiff(path)
    return Scene(
        scene_id=entry.scene_id,
        sensor_id=entry.sensor_id,
        timestamp=entry.timestamp,
        cloud_cover_pct=entry.cloud_cover_pct,
        bands=bands,
    )


def load_scenes(
    entries: Sequence[ManifestEntry],
    spec: SensorSpec,
    base_dir: Path | None = None,
    fetcher: Callable[[str], Path] | None = None,
    workers: int = 1,
) -> list[Scene]:
    """Load scenes, optionally in parallel; order follows ``entries``."""
    if workers > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(lambda e: load_scene(e, spec, base_dir, fetcher), entries)
            )
    return [load_scene(e, spec, base_dir, fetcher) for e in entries]


@dataclass(frozen=True)
class ExportRecord:
    composite_path: Path
    mask_path: Path
    scale_m: float
    crs: str

    def to_dict(self) -> dict:
        return {
            "composite_path": str(self.composite_path),
            "mask_path": str(self.mask_path),
            "scale_m": self.scale_m,
            "crs": self.crs,
        }


def export_composite(
    composite_grid: RasterGrid,
    mask_grid: RasterGrid,
    destination: str | Path,
    scale_m: float,
) -> ExportRecord:
    """Write the NDVI composite (float32, NaN nodata) and the binary mask
    (uint8, value 1, nodata 255) as GeoTIFFs. Deterministic: re-exporting
    the same grids produces byte-identical files."""
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    composite_path = destination / "ndvi_composite.tif"
    mask_path = destination / "ndvi_mask.tif"
    write_geotiff(composite_grid, composite_path)
    write_geotiff(mask_grid, mask_path)
    return ExportRecord(
        composite_path=composite_path,
        mask_path=mask_path,
        scale_m=scale_m,
        crs=str(composite_grid.crs),
    )
