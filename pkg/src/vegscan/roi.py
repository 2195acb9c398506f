"""Regions of interest: drawn polygons, bounding boxes, and attributed
vector datasets (administrative hierarchies, protected areas).

Rasterization uses pixel-center even-odd containment with the half-open
edge rule, so adjacent polygons partition pixels without double counting
and the result is checkable against a per-pixel point-in-polygon oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon, box, shape

from .errors import (
    CrsMismatch,
    DegenerateGeometry,
    InvalidRing,
    NoSuchUnit,
)
from .raster import BoundingBox, Crs, GeoTransform, RasterGrid


@dataclass(frozen=True)
class Roi:
    """Polygonal region: closed rings (even-odd interpretation), CRS, label."""

    rings: tuple[np.ndarray, ...]
    crs: Crs
    label: str
    area: float  # CRS units squared

    def bounds(self) -> BoundingBox:
        pts = np.vstack(self.rings)
        return BoundingBox(
            pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max()
        )

    def to_dict(self) -> dict:
        return {
            "rings": [r.tolist() for r in self.rings],
            "crs": str(self.crs),
            "label": self.label,
        }


def _rings_from_geometry(geom) -> tuple[np.ndarray, ...]:
    if isinstance(geom, Polygon):
        parts = [geom]
    elif isinstance(geom, MultiPolygon):
        parts = list(geom.geoms)
    else:
        polys = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]
        if not polys:
            raise DegenerateGeometry(f"geometry {geom.geom_type} has no area")
        parts = polys
    rings = []
    for poly in parts:
        for ring in [poly.exterior, *poly.interiors]:
            coords = np.asarray(ring.coords, dtype=np.float64)
            rings.append(coords)
    return tuple(rings)


def _roi_from_shapely(geom, crs: Crs, label: str) -> Roi:
    if geom.is_empty or geom.area == 0:
        raise DegenerateGeometry(f"{label!r} has zero area")
    return Roi(_rings_from_geometry(geom), crs, label, float(geom.area))


def roi_from_polygon(
    vertices: Sequence[tuple[float, float]], crs: Crs, label: str = "drawn polygon"
) -> Roi:
    """Build a validated Roi from a drawn vertex list (auto-closed)."""
    pts = [(float(x), float(y)) for x, y in vertices]
    if pts and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(set(pts)) < 3:
        raise DegenerateGeometry(
            f"polygon needs at least 3 distinct vertices, got {len(set(pts))}"
        )
    poly = Polygon(pts)
    if poly.area == 0:
        raise DegenerateGeometry("polygon vertices are collinear")
    if not poly.is_valid:
        raise InvalidRing("polygon ring is self-intersecting")
    return _roi_from_shapely(poly, crs, label)


def roi_from_bbox(bbox: BoundingBox, crs: Crs, label: str = "bounding box") -> Roi:
    if not (bbox.maxx > bbox.minx and bbox.maxy > bbox.miny):
        raise DegenerateGeometry("bounding box has zero extent")
    return _roi_from_shapely(box(*bbox), crs, label)


def _crs_from_geojson(doc: dict) -> Crs:
    crs_name = doc.get("crs", {}).get("properties", {}).get("name", "")
    if not crs_name:
        return Crs.geographic()
    epsg = int(str(crs_name).rsplit(":", 1)[-1])
    return Crs.geographic() if epsg == 4326 else Crs.projected(epsg)


def load_roi_geojson(path: str | Path, label: str | None = None) -> Roi:
    """Read one region from a GeoJSON file.

    Accepts a bare geometry, a Feature, or a FeatureCollection (all
    polygonal features unioned). A legacy ``crs`` member may declare a
    projected EPSG code; plain files are geographic per the GeoJSON spec.
    """
    path = Path(path)
    doc = json.loads(path.read_text())
    crs = _crs_from_geojson(doc)
    kind = doc.get("type")
    if kind == "FeatureCollection":
        geoms = [shape(f["geometry"]) for f in doc.get("features", [])]
    elif kind == "Feature":
        geoms = [shape(doc["geometry"])]
    elif kind in ("Polygon", "MultiPolygon"):
        geoms = [shape(doc)]
    else:
        raise DegenerateGeometry(f"{path}: no polygonal geometry (type={kind!r})")
    polygonal = [g for g in geoms if isinstance(g, (Polygon, MultiPolygon))]
    if not polygonal:
        raise DegenerateGeometry(f"{path}: no polygonal geometry")
    geom = shapely.union_all(polygonal)
    return _roi_from_shapely(geom, crs, label or path.stem)


# ---------------------------------------------------------------------------
# Attributed vector datasets


@dataclass
class VectorFeature:
    geometry: Polygon | MultiPolygon
    attributes: dict


@dataclass
class VectorDataset:
    """GeoJSON-backed features with a declared attribute hierarchy.

    ``hierarchy_keys`` orders the attribute names from the top level down
    (e.g. country -> province). Protected-area datasets set ``iso3_key`` to
    the country-code attribute, which doubles as the top hierarchy level.
    """

    features: list[VectorFeature]
    hierarchy_keys: tuple[str, ...]
    iso3_key: str | None = None
    crs: Crs = field(default_factory=Crs.geographic)

    def __post_init__(self):
        for i, feat in enumerate(self.features):
            for key in self.hierarchy_keys:
                if key not in feat.attributes:
                    raise ValueError(f"feature {i} missing attribute {key!r}")


def load_vector_dataset(
    path: str | Path,
    hierarchy_keys: Sequence[str],
    iso3_key: str | None = None,
) -> VectorDataset:
    """Read a GeoJSON FeatureCollection of (Multi)Polygons with properties."""
    doc = json.loads(Path(path).read_text())
    if doc.get("type") != "FeatureCollection":
        raise ValueError(f"{path}: expected a GeoJSON FeatureCollection")
    crs = _crs_from_geojson(doc)
    features = []
    for feat in doc.get("features", []):
        geom = shape(feat["geometry"])
        if not isinstance(geom, (Polygon, MultiPolygon)):
            raise ValueError(f"{path}: unsupported geometry {geom.geom_type}")
        features.append(VectorFeature(geom, dict(feat.get("properties", {}))))
    return VectorDataset(features, tuple(hierarchy_keys), iso3_key, crs)


def _filter_by_prefix(
    dataset: VectorDataset, selections: Sequence[str]
) -> list[VectorFeature]:
    if len(selections) > len(dataset.hierarchy_keys):
        raise NoSuchUnit(
            f"path has {len(selections)} levels; dataset has "
            f"{len(dataset.hierarchy_keys)}"
        )
    matches = dataset.features
    for key, value in zip(dataset.hierarchy_keys, selections):
        matches = [f for f in matches if f.attributes[key] == value]
        if not matches:
            raise NoSuchUnit(f"no feature with {key}={value!r}")
    return matches


def list_children(dataset: VectorDataset, selections: Sequence[str]) -> list[str]:
    """Sorted distinct names of the next hierarchy level under a prefix."""
    if len(selections) >= len(dataset.hierarchy_keys):
        raise NoSuchUnit("path already addresses the deepest level")
    matches = _filter_by_prefix(dataset, selections)
    next_key = dataset.hierarchy_keys[len(selections)]
    return sorted({str(f.attributes[next_key]) for f in matches})


def resolve_admin_roi(dataset: VectorDataset, selections: Sequence[str]) -> Roi:
    """Dissolve every feature under the selected hierarchy path into one Roi."""
    if not selections:
        raise NoSuchUnit("empty hierarchy path")
    matches = _filter_by_prefix(dataset, selections)
    geom = shapely.union_all([f.geometry for f in matches])
    return _roi_from_shapely(geom, dataset.crs, " / ".join(selections))


def list_protected_areas(dataset: VectorDataset, country_iso3: str) -> list[str]:
    if dataset.iso3_key is None:
        raise ValueError("dataset has no ISO3 country-code attribute")
    name_key = dataset.hierarchy_keys[-1]
    names = {
        str(f.attributes[name_key])
        for f in dataset.features
        if str(f.attributes[dataset.iso3_key]).upper() == country_iso3.upper()
    }
    if not names:
        raise NoSuchUnit(f"no protected areas for country {country_iso3!r}")
    return sorted(names)


def resolve_protected_area_roi(
    dataset: VectorDataset, country_iso3: str, pa_name: str
) -> Roi:
    if dataset.iso3_key is None:
        raise ValueError("dataset has no ISO3 country-code attribute")
    name_key = dataset.hierarchy_keys[-1]
    matches = [
        f
        for f in dataset.features
        if str(f.attributes[dataset.iso3_key]).upper() == country_iso3.upper()
        and f.attributes[name_key] == pa_name
    ]
    if not matches:
        raise NoSuchUnit(f"no protected area {pa_name!r} in {country_iso3!r}")
    geom = shapely.union_all([f.geometry for f in matches])
    return _roi_from_shapely(geom, dataset.crs, pa_name)


# ---------------------------------------------------------------------------
# Rasterization


def rasterize_rings(
    rings: Iterable[np.ndarray],
    transform: GeoTransform,
    width: int,
    height: int,
) -> np.ndarray:
    """Scanline even-odd fill against pixel centers.

    An edge contributes a crossing to a row when the row's center y lies in
    the half-open span [min(y1,y2), max(y1,y2)); a center is inside when an
    odd number of crossings lies strictly to its right. Horizontal edges
    never cross. This makes centers on shared boundaries land in exactly
    one of two adjacent polygons.
    """
    rows = np.arange(height, dtype=np.float64)
    cols = np.arange(width, dtype=np.float64)
    py = transform.origin_y + (rows + 0.5) * transform.pixel_height
    px = transform.origin_x + (cols + 0.5) * transform.pixel_width

    crossings: list[list[float]] = [[] for _ in range(height)]
    for ring in rings:
        pts = np.asarray(ring, dtype=np.float64)
        for i in range(len(pts) - 1):
            x1, y1 = pts[i]
            x2, y2 = pts[i + 1]
            if y1 == y2:
                continue
            ylo, yhi = (y1, y2) if y1 < y2 else (y2, y1)
            hit = np.nonzero((py >= ylo) & (py < yhi))[0]
            if hit.size == 0:
                continue
            xc = x1 + (py[hit] - y1) * (x2 - x1) / (y2 - y1)
            for r, x in zip(hit, xc):
                crossings[r].append(float(x))

    out = np.zeros((height, width), dtype=bool)
    for r in range(height):
        if not crossings[r]:
            continue
        xs = np.sort(np.asarray(crossings[r]))
        right_of = xs.size - np.searchsorted(xs, px, side="right")
        out[r] = (right_of % 2) == 1
    return out


def rasterize_roi(
    roi: Roi, transform: GeoTransform, width: int, height: int
) -> RasterGrid:
    """Boolean grid: true where the pixel center falls inside the Roi."""
    if roi.crs != transform.crs:
        raise CrsMismatch(f"roi is in {roi.crs}, grid in {transform.crs}")
    mask = rasterize_rings(roi.rings, transform, width, height)
    return RasterGrid(mask, np.ones_like(mask, dtype=bool), transform)
