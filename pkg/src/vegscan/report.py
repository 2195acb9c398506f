"""File reports for the CLI: delimited series output plus rendered figures.

Writes into a destination directory:

    timeseries.csv   per-scene mean index values (gaps left empty)
    timeseries.png   the same series plotted with gaps preserved
    composite.png    the median composite with the retained mask outlined
    summary.json     the full analysis result document
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytics import TimeSeriesPoint, time_series_csv
from .pipeline import AnalysisResult
from .raster import RasterGrid


def series_figure(points: Sequence[TimeSeriesPoint], scene_count: int):
    """Figure of mean index per acquisition; absent means become gaps."""
    dates = [p.timestamp for p in points]
    means = [np.nan if p.mean_ndvi is None else p.mean_ndvi for p in points]

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(dates, means, marker="o", linestyle="-", color="tab:green")
    ax.set_ylim(-1.0, 1.0)
    ax.set_xlabel("acquisition date")
    ax.set_ylabel("mean NDVI in region")
    ax.set_title(f"NDVI time series ({scene_count} images)")
    ax.grid(True, alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    return fig


def render_time_series_figure(
    points: Sequence[TimeSeriesPoint], dest: str | Path, scene_count: int
) -> Path:
    dest = Path(dest)
    fig = series_figure(points, scene_count)
    fig.savefig(dest, dpi=120)
    plt.close(fig)
    return dest


def composite_figure(composite: RasterGrid, mask: RasterGrid | None):
    """Figure of the composite; retained pixels are shaded by the mask."""
    shown = np.where(composite.valid, composite.values, np.nan)

    fig, ax = plt.subplots(figsize=(6, 6))
    b = composite.bounds()
    extent = (b.minx, b.maxx, b.miny, b.maxy)
    image = ax.imshow(shown, cmap="RdYlGn", vmin=-1.0, vmax=1.0, extent=extent)
    if mask is not None:
        retained = mask.valid & (mask.values.astype(np.int64) == 1)
        overlay = np.zeros((*retained.shape, 4), dtype=np.float32)
        overlay[retained] = (0.1, 0.2, 0.9, 0.35)
        ax.imshow(overlay, extent=extent)
    ax.set_title("median NDVI composite (retained pixels shaded)")
    ax.set_xlabel(str(composite.crs))
    fig.colorbar(image, ax=ax, shrink=0.8, label="NDVI")
    fig.tight_layout()
    return fig


def render_composite_figure(
    composite: RasterGrid, mask: RasterGrid | None, dest: str | Path
) -> Path:
    dest = Path(dest)
    fig = composite_figure(composite, mask)
    fig.savefig(dest, dpi=120)
    plt.close(fig)
    return dest


def write_report(
    dest_dir: str | Path,
    result: AnalysisResult,
    composite: RasterGrid,
    mask: RasterGrid | None = None,
) -> dict[str, Path]:
    """Render every report artifact for one completed analysis."""
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)

    csv_path = dest_dir / "timeseries.csv"
    csv_path.write_text(time_series_csv(list(result.series)))

    series_png = render_time_series_figure(
        result.series, dest_dir / "timeseries.png", result.scene_count
    )
    composite_png = render_composite_figure(
        composite, mask, dest_dir / "composite.png"
    )

    summary_path = dest_dir / "summary.json"
    summary_path.write_text(json.dumps(result.to_dict(), indent=2) + "\n")

    return {
        "timeseries_csv": csv_path,
        "timeseries_png": series_png,
        "composite_png": composite_png,
        "summary_json": summary_path,
    }
