"""Client for STAC Item Search endpoints, narrowed to the searches the
analysis engine issues: bbox + datetime + collection + cloud-cover ceiling.

Network failures (connection errors, 5xx, timeouts) are retried up to three
attempts with exponential backoff; malformed responses (bad JSON, missing
required members, 4xx) are protocol errors and never retried. Downloads go
through a content-addressed on-disk cache so repeated analyses over the
same scenes do not refetch imagery.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable, Iterator

import requests

from .errors import ManifestError, ProtocolError, TransportError
from .ingest import ManifestEntry, SceneManifest, manifest_from_dicts
from .raster import BoundingBox
from .sensors import SensorSpec

MAX_ATTEMPTS = 3
BACKOFF_BASE_S = 0.5
DEFAULT_PAGE_LIMIT = 100

# STAC collection ids and per-collection asset keys, by canonical sensor id.
COLLECTION_BINDINGS: dict[str, dict] = {
    "Sentinel-2": {
        "collection": "sentinel-2-l2a",
        "assets": {"B4": "red", "B8": "nir", "SCL": "scl"},
    },
    "Landsat 9": {
        "collection": "landsat-c2-l2",
        "assets": {"SR_B4": "red", "SR_B5": "nir08", "QA_PIXEL": "qa_pixel"},
    },
    "Landsat 8": {
        "collection": "landsat-c2-l2",
        "assets": {"SR_B4": "red", "SR_B5": "nir08", "QA_PIXEL": "qa_pixel"},
    },
    "Landsat 7": {
        "collection": "landsat-c2-l2",
        "assets": {"SR_B3": "red", "SR_B4": "nir08", "QA_PIXEL": "qa_pixel"},
    },
    "Landsat 5": {
        "collection": "landsat-c2-l2",
        "assets": {"SR_B3": "red", "SR_B4": "nir08", "QA_PIXEL": "qa_pixel"},
    },
}


@dataclass(frozen=True)
class StacQuery:
    bbox: BoundingBox
    start: date
    end: date
    collection: str
    max_cloud_pct: float
    page_limit: int = DEFAULT_PAGE_LIMIT

    def body(self) -> dict:
        return {
            "bbox": list(self.bbox),
            "datetime": f"{self.start.isoformat()}T00:00:00Z/"
            f"{self.end.isoformat()}T23:59:59Z",
            "collections": [self.collection],
            "query": {"eo:cloud_cover": {"lte": self.max_cloud_pct}},
            "limit": self.page_limit,
        }


def _post_with_retry(
    url: str,
    body: dict,
    session: requests.Session,
    timeout_s: float,
    sleep: Callable[[float], None] = time.sleep,
) -> dict:
    last_exc: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            sleep(BACKOFF_BASE_S * (2 ** (attempt - 1)))
        try:
            resp = session.post(url, json=body, timeout=timeout_s)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code >= 500:
            last_exc = TransportError(f"{url}: server returned {resp.status_code}")
            continue
        if resp.status_code >= 400:
            raise ProtocolError(f"{url}: client error {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{url}: response is not JSON: {exc}") from exc
    raise TransportError(
        f"{url}: gave up after {MAX_ATTEMPTS} attempts: {last_exc}"
    ) from (last_exc if isinstance(last_exc, Exception) else None)


def _get_with_retry(
    url: str,
    session: requests.Session,
    timeout_s: float,
    sleep: Callable[[float], None] = time.sleep,
) -> bytes:
    last_exc: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        if attempt:
            sleep(BACKOFF_BASE_S * (2 ** (attempt - 1)))
        try:
            resp = session.get(url, timeout=timeout_s)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code >= 500:
            last_exc = TransportError(f"{url}: server returned {resp.status_code}")
            continue
        if resp.status_code >= 400:
            raise ProtocolError(f"{url}: client error {resp.status_code}")
        return resp.content
    raise TransportError(
        f"{url}: gave up after {MAX_ATTEMPTS} attempts: {last_exc}"
    ) from (last_exc if isinstance(last_exc, Exception) else None)


def _iter_items(
    endpoint: str,
    query: StacQuery,
    session: requests.Session,
    timeout_s: float,
    sleep: Callable[[float], None],
) -> Iterator[dict]:
    url = endpoint.rstrip("/") + "/search"
    body = query.body()
    while True:
        page = _post_with_retry(url, body, session, timeout_s, sleep)
        features = page.get("features")
        if not isinstance(features, list):
            raise ProtocolError(f"{url}: page has no feature list")
        yield from features
        next_link = next(
            (
                link
                for link in page.get("links", [])
                if link.get("rel") == "next"
            ),
            None,
        )
        if next_link is None:
            return
        if isinstance(next_link.get("body"), dict):
            body = next_link["body"]
            url = next_link.get("href", url)
        elif next_link.get("href"):
            url = next_link["href"]
        else:
            raise ProtocolError(f"{url}: next link carries neither href nor body")


def _entry_from_item(item: dict, spec: SensorSpec, assets_map: dict) -> dict:
    try:
        props = item["properties"]
        bbox = item["bbox"]
        band_paths = {}
        for band_label, asset_key in assets_map.items():
            band_paths[band_label] = item["assets"][asset_key]["href"]
        return {
            "scene_id": item["id"],
            "sensor_id": spec.sensor_id,
            "timestamp": props["datetime"][:10],
            "cloud_cover_pct": float(props["eo:cloud_cover"]),
            "bbox": bbox[:4],
            "band_paths": band_paths,
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise ProtocolError(f"item {item.get('id')!r}: malformed: {exc}") from exc


def stac_search(
    endpoint: str,
    spec: SensorSpec,
    bbox: BoundingBox,
    start: date,
    end: date,
    max_cloud_pct: float,
    session: requests.Session | None = None,
    timeout_s: float = 30.0,
    sleep: Callable[[float], None] = time.sleep,
) -> SceneManifest:
    """Search a STAC endpoint and shape the hits into a scene manifest."""
    binding = COLLECTION_BINDINGS.get(spec.sensor_id)
    if binding is None:
        raise ProtocolError(f"no catalog binding for sensor {spec.sensor_id!r}")
    own_session = session is None
    session = session or requests.Session()
    query = StacQuery(
        bbox=bbox,
        start=start,
        end=end,
        collection=binding["collection"],
        max_cloud_pct=max_cloud_pct,
    )
    try:
        raw = [
            _entry_from_item(item, spec, binding["assets"])
            for item in _iter_items(endpoint, query, session, timeout_s, sleep)
        ]
    finally:
        if own_session:
            session.close()
    try:
        return manifest_from_dicts(raw)
    except ManifestError as exc:
        raise ProtocolError(f"search results rejected: {exc}") from exc


class DownloadCache:
    """Content-addressed whole-file cache with an LRU size bound.

    Files land under ``root`` named by the SHA-256 of their URL. Eviction
    uses access order (mtime refreshed on every hit) and runs after each
    store, so the directory never holds more than ``max_bytes`` plus one
    in-flight file.
    """

    def __init__(self, root: str | Path, max_bytes: int = 2_000_000_000):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        if max_bytes <= 0:
            raise ValueError("max_bytes must be positive")
        self.max_bytes = max_bytes
        self.hits = 0
        self.misses = 0

    def _slot(self, url: str) -> Path:
        digest = hashlib.sha256(url.encode()).hexdigest()
        suffix = Path(url.split("?", 1)[0]).suffix or ".bin"
        return self.root / f"{digest}{suffix}"

    def _evict(self, keep: Path) -> None:
        entries = [p for p in self.root.iterdir() if p.is_file()]
        total = sum(p.stat().st_size for p in entries)
        if total <= self.max_bytes:
            return
        entries.sort(key=lambda p: p.stat().st_mtime)
        for victim in entries:
            if victim == keep:
                continue
            total -= victim.stat().st_size
            victim.unlink()
            if total <= self.max_bytes:
                return

    def fetch(
        self,
        url: str,
        session: requests.Session | None = None,
        timeout_s: float = 120.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> Path:
        slot = self._slot(url)
        if slot.exists():
            self.hits += 1
            slot.touch()
            return slot
        self.misses += 1
        own_session = session is None
        session = session or requests.Session()
        try:
            payload = _get_with_retry(url, session, timeout_s, sleep)
        finally:
            if own_session:
                session.close()
        tmp = slot.with_suffix(slot.suffix + ".part")
        tmp.write_bytes(payload)
        tmp.replace(slot)
        self._evict(keep=slot)
        return slot

    def fetcher(
        self, session: requests.Session | None = None
    ) -> Callable[[str], Path]:
        """Bind a session and return a plain ``url -> local path`` callable."""
        return lambda url: self.fetch(url, session=session)
