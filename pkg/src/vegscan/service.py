"""HTTP gateway exposing validation, analysis, browsing, and export.

Error bodies always use the envelope {code, message, field?}; validation
failures additionally attach the full violation report. Validation results
themselves are data, not errors: POST /validate answers 200 whether or not
the request would be rejected.
"""

from __future__ import annotations

import json
from datetime import date

from fastapi import FastAPI, Query, Request
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, ValidationError

from .errors import (
    BandNotFound,
    CrsMismatch,
    DegenerateGeometry,
    EmptyRegion,
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
    ValidationFailed,
    VegscanError,
)
from .pipeline import AnalysisEngine, AnalysisRequest
from .raster import BoundingBox, Crs
from .roi import Roi, roi_from_bbox, roi_from_polygon
from .sensors import AnalysisParams, registry_document


class DatasetQueryModel(BaseModel):
    name: str
    path: list[str]


class RoiModel(BaseModel):
    polygon: list[tuple[float, float]] | None = None
    bbox: tuple[float, float, float, float] | None = None
    dataset: DatasetQueryModel | None = None
    crs: str = "EPSG:4326"

    def variant_count(self) -> int:
        return sum(v is not None for v in (self.polygon, self.bbox, self.dataset))


class AnalyzeBody(BaseModel):
    sensor_id: str
    start_date: date
    end_date: date
    ndvi_min: float
    ndvi_max: float
    max_cloud_pct: float
    roi: RoiModel | None = None

    def params(self) -> AnalysisParams:
        return AnalysisParams(
            sensor_id=self.sensor_id,
            start_date=self.start_date,
            end_date=self.end_date,
            ndvi_min=self.ndvi_min,
            ndvi_max=self.ndvi_max,
            max_cloud_pct=self.max_cloud_pct,
        )


class RequestShapeError(Exception):
    """Body parsed as JSON but does not fit the request schema."""


def _error_body(code: str, message: str, field: str | None = None, **extra) -> dict:
    body = {"code": code, "message": message}
    if field is not None:
        body["field"] = field
    body.update(extra)
    return body


# HTTP status and envelope code per engine error type.
_ERROR_MAP: dict[type, tuple[int, str, str | None]] = {
    UnknownSensor: (422, "UNKNOWN_SENSOR", "sensor_id"),
    DegenerateGeometry: (422, "DEGENERATE_GEOMETRY", "roi"),
    InvalidRing: (422, "INVALID_RING", "roi"),
    CrsMismatch: (422, "CRS_MISMATCH", "roi"),
    EmptyRegion: (422, "EMPTY_REGION", "roi"),
    NoSuchUnit: (404, "NO_SUCH_UNIT", "roi"),
    UnknownDataset: (404, "UNKNOWN_DATASET", "roi"),
    UnknownAnalysis: (404, "UNKNOWN_ANALYSIS", None),
    TransportError: (502, "UPSTREAM_TRANSPORT", None),
    ProtocolError: (502, "UPSTREAM_PROTOCOL", None),
    ManifestError: (500, "MANIFEST_ERROR", None),
    RasterIOError: (500, "RASTER_IO", None),
    BandNotFound: (500, "BAND_NOT_FOUND", None),
}


def _map_error(exc: VegscanError) -> JSONResponse:
    if isinstance(exc, ValidationFailed):
        return JSONResponse(
            status_code=422,
            content=_error_body(
                "VALIDATION_FAILED",
                "request parameters failed validation",
                report=exc.report.to_dict(),
            ),
        )
    if isinstance(exc, PixelBudgetExceeded):
        return JSONResponse(
            status_code=413,
            content=_error_body(
                "PIXEL_BUDGET_EXCEEDED",
                str(exc),
                requested_pixels=exc.requested,
                pixel_budget=exc.budget,
            ),
        )
    for klass, (status, code, field) in _ERROR_MAP.items():
        if isinstance(exc, klass):
            return JSONResponse(
                status_code=status, content=_error_body(code, str(exc), field)
            )
    return JSONResponse(
        status_code=500, content=_error_body("INTERNAL", str(exc))
    )


def _resolve_roi(engine: AnalysisEngine, roi_model: RoiModel) -> Roi:
    crs = Crs.from_string(roi_model.crs)
    if roi_model.polygon is not None:
        return roi_from_polygon(roi_model.polygon, crs)
    if roi_model.bbox is not None:
        return roi_from_bbox(BoundingBox(*roi_model.bbox), crs)
    query = roi_model.dataset
    return engine.dataset_roi(query.name, query.path)


async def _read_body(request: Request) -> AnalyzeBody:
    try:
        payload = await request.json()
    except json.JSONDecodeError as exc:
        raise RequestShapeError(f"body is not valid JSON: {exc}") from exc
    try:
        body = AnalyzeBody.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(part) for part in first["loc"])
        raise RequestShapeError(f"{loc}: {first['msg']}") from exc
    if body.roi is not None and body.roi.variant_count() > 1:
        raise RequestShapeError(
            "roi must use exactly one of polygon, bbox, or dataset"
        )
    return body


def create_app(engine: AnalysisEngine) -> FastAPI:
    app = FastAPI(
        title="vegscan gateway",
        description="Vegetation index analysis over satellite imagery",
        version="1.0",
        openapi_url="/spec",
    )

    @app.exception_handler(VegscanError)
    async def _vegscan_error(_request: Request, exc: VegscanError):
        return _map_error(exc)

    @app.exception_handler(RequestShapeError)
    async def _shape_error(_request: Request, exc: RequestShapeError):
        return JSONResponse(
            status_code=400, content=_error_body("BAD_REQUEST", str(exc))
        )

    @app.post("/validate")
    async def validate(request: Request):
        body = await _read_body(request)
        roi_defined = body.roi is not None and body.roi.variant_count() == 1
        report = engine.validate(body.params(), roi_defined=roi_defined)
        return JSONResponse(content=report.to_dict())

    @app.post("/analyze")
    async def analyze(request: Request):
        body = await _read_body(request)
        if body.roi is None or body.roi.variant_count() == 0:
            report = engine.validate(body.params(), roi_defined=False)
            raise ValidationFailed(report)
        roi = _resolve_roi(engine, body.roi)
        result = engine.analyze(AnalysisRequest(params=body.params(), roi=roi))
        return JSONResponse(content=result.to_dict())

    @app.get("/sensors")
    async def sensors():
        return JSONResponse(content=registry_document())

    @app.get("/datasets/{dataset}/children")
    async def children(dataset: str, path: list[str] = Query(default=[])):
        names = engine.dataset_children(dataset, path)
        return JSONResponse(content={"children": names})

    @app.get("/export/{analysis_id}/{kind}")
    async def export(analysis_id: str, kind: str):
        file_path = engine.export_path(analysis_id, kind)
        return FileResponse(
            file_path, media_type="image/tiff", filename=file_path.name
        )

    return app
