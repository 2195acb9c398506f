"""Command-line interface mirroring the HTTP gateway's operations.

Exit codes: 0 success, 2 parameter validation failure, 3 no scenes matched,
1 any other error.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import click

from .errors import ValidationFailed, VegscanError
from .geotiff import read_geotiff
from .ingest import load_manifest
from .pipeline import (
    AnalysisEngine,
    AnalysisRequest,
    CACHE_DIR_ENV,
    ExportStore,
    ManifestSource,
    NoScenesResult,
    StacSource,
)
from .raster import BoundingBox, Crs
from .roi import (
    Roi,
    load_roi_geojson,
    load_vector_dataset,
    roi_from_bbox,
)
from .sensors import (
    AnalysisParams,
    SENSOR_REGISTRY,
    lookup_sensor,
    validate_params,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_NO_SCENES = 3

ADMIN_KEYS = ("ADM0_NAME", "ADM1_NAME")
PA_KEYS = ("ISO3", "NAME")


def _echo_report(report) -> None:
    for violation in report.violations:
        click.echo(f"{violation.code} [{violation.field}]: {violation.message}", err=True)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    raise SystemExit(EXIT_ERROR)


def _param_options(f):
    decorators = [
        click.option("--sensor", "sensor_id", required=True, help="Platform id, e.g. sentinel-2."),
        click.option("--start", "start_date", required=True, type=click.DateTime(["%Y-%m-%d"]), help="Window start (YYYY-MM-DD)."),
        click.option("--end", "end_date", required=True, type=click.DateTime(["%Y-%m-%d"]), help="Window end (YYYY-MM-DD)."),
        click.option("--min", "ndvi_min", required=True, type=float, help="Lower NDVI threshold."),
        click.option("--max", "ndvi_max", required=True, type=float, help="Upper NDVI threshold."),
        click.option("--cloud", "max_cloud_pct", default=10.0, show_default=True, type=float, help="Maximum scene cloud cover percentage."),
    ]
    for dec in reversed(decorators):
        f = dec(f)
    return f


def _roi_options(f):
    decorators = [
        click.option("--roi", "roi_file", type=click.Path(exists=True, dir_okay=False), help="GeoJSON file with the region polygon."),
        click.option("--bbox", nargs=4, type=float, default=None, help="Region as minx miny maxx maxy."),
        click.option("--roi-crs", default="EPSG:4326", show_default=True, help="CRS of --bbox coordinates."),
        click.option("--dataset", "dataset_name", help="Named vector dataset to select the region from."),
        click.option("--path", "dataset_path", multiple=True, help="Hierarchy segment within --dataset (repeatable)."),
        click.option("--admin", "admin_file", type=click.Path(exists=True, dir_okay=False), help="Admin-boundary GeoJSON to register as dataset 'admin'."),
        click.option("--protected-areas", "pa_file", type=click.Path(exists=True, dir_okay=False), help="Protected-area GeoJSON to register as dataset 'protected_areas'."),
    ]
    for dec in reversed(decorators):
        f = dec(f)
    return f


def _source_options(f):
    decorators = [
        click.option("--manifest", "manifest_file", type=click.Path(exists=True, dir_okay=False), help="Local scene manifest JSON."),
        click.option("--stac", "stac_endpoint", help="Remote STAC API endpoint."),
        click.option("--cache-dir", envvar=CACHE_DIR_ENV, default=None, help="Directory for downloads and exports."),
        click.option("--workers", default=1, show_default=True, type=int, help="Parallel workers for scene loading and compositing."),
        click.option("--tile-rows", default=None, type=int, help="Composite in row blocks of this height."),
        click.option("--pixel-budget", default=None, type=int, help="Refuse analyses covering more pixels than this."),
    ]
    for dec in reversed(decorators):
        f = dec(f)
    return f


def _register_datasets(engine: AnalysisEngine, admin_file, pa_file) -> None:
    if admin_file:
        engine.register_dataset(
            "admin", load_vector_dataset(admin_file, ADMIN_KEYS)
        )
    if pa_file:
        engine.register_dataset(
            "protected_areas",
            load_vector_dataset(pa_file, PA_KEYS, iso3_key="ISO3"),
        )


def _build_engine(
    manifest_file,
    stac_endpoint,
    cache_dir,
    workers,
    tile_rows,
    pixel_budget,
) -> AnalysisEngine:
    if bool(manifest_file) == bool(stac_endpoint):
        _fail("provide exactly one of --manifest or --stac")
    if manifest_file:
        source = ManifestSource(load_manifest(manifest_file))
    else:
        root = Path(cache_dir) if cache_dir else Path.cwd() / ".vegscan-cache"
        source = StacSource(stac_endpoint, root / "downloads")
    kwargs = {"workers": workers, "tile_rows": tile_rows}
    if pixel_budget is not None:
        kwargs["pixel_budget"] = pixel_budget
    if cache_dir is not None:
        kwargs["export_dir"] = Path(cache_dir) / "exports"
    return AnalysisEngine(source, **kwargs)


def _resolve_cli_roi(
    engine: AnalysisEngine | None,
    roi_file,
    bbox,
    roi_crs,
    dataset_name,
    dataset_path,
) -> Roi | None:
    chosen = [v for v in (roi_file, bbox or None, dataset_name) if v]
    if len(chosen) > 1:
        _fail("use only one of --roi, --bbox, or --dataset")
    if roi_file:
        return load_roi_geojson(roi_file)
    if bbox:
        return roi_from_bbox(BoundingBox(*bbox), Crs.from_string(roi_crs))
    if dataset_name:
        if engine is None:
            _fail("--dataset requires a scene source")
        if not dataset_path:
            _fail("--dataset requires at least one --path segment")
        return engine.dataset_roi(dataset_name, list(dataset_path))
    return None


def _params(sensor_id, start_date, end_date, ndvi_min, ndvi_max, max_cloud_pct):
    return AnalysisParams(
        sensor_id=sensor_id,
        start_date=start_date.date(),
        end_date=end_date.date(),
        ndvi_min=ndvi_min,
        ndvi_max=ndvi_max,
        max_cloud_pct=max_cloud_pct,
    )


@click.group()
def main():
    """Vegetation index analysis over satellite imagery."""


@main.command()
@_param_options
@_roi_options
@_source_options
@click.option("--json", "as_json", is_flag=True, help="Print the full result document as JSON.")
@click.option("--report-dir", type=click.Path(file_okay=False), help="Write CSV and figure report files here.")
def analyze(
    sensor_id, start_date, end_date, ndvi_min, ndvi_max, max_cloud_pct,
    roi_file, bbox, roi_crs, dataset_name, dataset_path, admin_file, pa_file,
    manifest_file, stac_endpoint, cache_dir, workers, tile_rows, pixel_budget,
    as_json, report_dir,
):
    """Run the full analysis and print the resulting area."""
    try:
        engine = _build_engine(
            manifest_file, stac_endpoint, cache_dir, workers, tile_rows, pixel_budget
        )
        _register_datasets(engine, admin_file, pa_file)
        roi = _resolve_cli_roi(
            engine, roi_file, bbox, roi_crs, dataset_name, dataset_path
        )
        params = _params(
            sensor_id, start_date, end_date, ndvi_min, ndvi_max, max_cloud_pct
        )
        if roi is None:
            report = engine.validate(params, roi_defined=False)
            _echo_report(report)
            raise SystemExit(EXIT_INVALID)
        result = engine.analyze(AnalysisRequest(params=params, roi=roi))
    except ValidationFailed as exc:
        _echo_report(exc.report)
        raise SystemExit(EXIT_INVALID) from None
    except VegscanError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_ERROR) from None

    if isinstance(result, NoScenesResult):
        click.echo(result.message, err=True)
        raise SystemExit(EXIT_NO_SCENES)

    if as_json:
        click.echo(json.dumps(result.to_dict(), indent=2))
    else:
        click.echo(
            f"{result.area.area_km2:.4f} km2 within thresholds "
            f"[{ndvi_min}, {ndvi_max}] over {result.area.pixel_count} pixels "
            f"({result.scene_count} scenes)"
        )

    if report_dir:
        composite = read_geotiff(engine.export_path(result.analysis_id, "composite"))
        mask = read_geotiff(engine.export_path(result.analysis_id, "mask"))
        from .report import write_report

        written = write_report(report_dir, result, composite, mask)
        for name, path in written.items():
            click.echo(f"wrote {name}: {path}", err=True)


@main.command()
@_param_options
@_roi_options
def validate(
    sensor_id, start_date, end_date, ndvi_min, ndvi_max, max_cloud_pct,
    roi_file, bbox, roi_crs, dataset_name, dataset_path, admin_file, pa_file,
):
    """Check parameters against every rule; list all violations."""
    params = _params(
        sensor_id, start_date, end_date, ndvi_min, ndvi_max, max_cloud_pct
    )
    roi_defined = bool(roi_file or bbox or (dataset_name and dataset_path))
    try:
        spec = lookup_sensor(sensor_id)
    except VegscanError:
        spec = None
    report = validate_params(params, spec, roi_defined)
    if report.ok:
        click.echo("parameters valid")
        return
    _echo_report(report)
    raise SystemExit(EXIT_INVALID)


@main.command()
def sensors():
    """List supported platforms and their availability windows."""
    header = f"{'platform':<12} {'red':<6} {'nir':<6} {'qa':<9} {'from':<12} {'to':<12} scale"
    click.echo(header)
    for s in SENSOR_REGISTRY:
        end = s.availability_end.isoformat() if s.availability_end else "present"
        click.echo(
            f"{s.sensor_id:<12} {s.red_band:<6} {s.nir_band:<6} {s.qa_band:<9} "
            f"{s.availability_start.isoformat():<12} {end:<12} {s.native_scale_m:g} m"
        )


@main.command()
@_roi_options
@_source_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(
    roi_file, bbox, roi_crs, dataset_name, dataset_path, admin_file, pa_file,
    manifest_file, stac_endpoint, cache_dir, workers, tile_rows, pixel_budget,
    host, port,
):
    """Run the HTTP gateway over the configured scene source."""
    import uvicorn

    from .service import create_app

    try:
        engine = _build_engine(
            manifest_file, stac_endpoint, cache_dir, workers, tile_rows, pixel_budget
        )
        _register_datasets(engine, admin_file, pa_file)
    except VegscanError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_ERROR) from None
    uvicorn.run(create_app(engine), host=host, port=port)


@main.command()
@click.argument("analysis_id")
@click.option("--kind", type=click.Choice(["composite", "mask"]), default="composite", show_default=True)
@click.option("--cache-dir", envvar=CACHE_DIR_ENV, required=True, help="Cache directory the analysis ran with.")
@click.option("--out", type=click.Path(dir_okay=False), help="Copy the GeoTIFF here instead of printing its path.")
def export(analysis_id, kind, cache_dir, out):
    """Fetch a stored export by analysis id."""
    store = ExportStore(Path(cache_dir) / "exports")
    try:
        path = store.get(analysis_id, kind)
    except VegscanError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_ERROR) from None
    if out:
        shutil.copyfile(path, out)
        click.echo(out)
    else:
        click.echo(str(path))


@main.command("make-fixtures")
@click.argument("destination", type=click.Path(file_okay=False))
def make_fixtures(destination):
    """Write the bundled demo dataset (scenes, manifest, regions)."""
    from .fixtures import build_demo_dataset

    paths = build_demo_dataset(destination)
    click.echo(f"manifest: {paths.manifest}")
    click.echo(f"roi: {paths.roi}")
    click.echo(f"admin: {paths.admin}")
    click.echo(f"protected areas: {paths.protected_areas}")


if __name__ == "__main__":
    main()
