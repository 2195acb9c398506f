"""NDVI computation, per-pixel median compositing, and threshold masking."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .errors import EmptyStack, GridMismatch
from .raster import RasterGrid, iter_row_blocks, require_same_geometry


@dataclass(frozen=True)
class NdviComposite:
    """Per-pixel median NDVI over a date range."""

    grid: RasterGrid
    scene_count: int
    date_range: tuple[date, date]
    sensor_id: str

    def __post_init__(self):
        if self.scene_count < 1:
            raise ValueError("composite requires at least one scene")


@dataclass(frozen=True)
class ThresholdMask:
    """Self-masked classification: retained pixels are 1, all others invalid."""

    grid: RasterGrid
    ndvi_min: float
    ndvi_max: float


def ndvi_scene(red: RasterGrid, nir: RasterGrid) -> RasterGrid:
    """(nir - red) / (nir + red), float32 pixelwise.

    Pixels where either input is invalid, or where the denominator is zero,
    come out invalid. No clamping is applied: negative reflectance (possible
    after the Landsat offset) can push values outside [-1, 1] and the median
    composite is left to absorb such artifacts.
    """
    if red.shape != nir.shape or red.transform != nir.transform:
        raise GridMismatch("red and NIR grids do not align")
    r = red.values.astype(np.float32, copy=False)
    n = nir.values.astype(np.float32, copy=False)
    denom = n + r
    valid = red.valid & nir.valid & (denom != 0)
    out = np.zeros(denom.shape, dtype=np.float32)
    np.divide(n - r, denom, out=out, where=valid)
    return RasterGrid(out, valid, red.transform)


def _median_block(stack_values: np.ndarray, stack_valid: np.ndarray):
    """Median over axis 0 honoring validity; returns (values, valid).

    Invalid samples are pushed to the end as NaN by the sort; the two
    central order statistics are averaged in float64 and the result stored
    as float32, so ports of this convention agree to the last bit.
    """
    counts = stack_valid.sum(axis=0)
    data = np.where(stack_valid, stack_values, np.nan).astype(np.float32)
    data.sort(axis=0)  # NaNs sort to the end
    hi = np.maximum(counts - 1, 0)
    lo_idx = (hi // 2, np.arange(data.shape[1])[:, None], np.arange(data.shape[2]))
    hi_idx = (hi - hi // 2, *lo_idx[1:])
    lower = data[lo_idx].astype(np.float64)
    upper = data[hi_idx].astype(np.float64)
    values = ((lower + upper) * 0.5).astype(np.float32)
    valid = counts > 0
    values[~valid] = 0.0
    return values, valid


def median_composite(
    ndvi_stack: Sequence[RasterGrid],
    *,
    tile_rows: int | None = None,
    workers: int = 1,
) -> RasterGrid:
    """Per-pixel median across the stack.

    A pixel is valid iff it has at least one valid sample; even sample
    counts use the mean of the two central values. The result is invariant
    under stack order, tiling, and worker count.
    """
    if not ndvi_stack:
        raise EmptyStack("cannot composite an empty scene stack")
    require_same_geometry(*ndvi_stack)
    first = ndvi_stack[0]
    values_3d = np.stack([g.values.astype(np.float32, copy=False) for g in ndvi_stack])
    valid_3d = np.stack([g.valid for g in ndvi_stack])

    blocks = list(iter_row_blocks(first.height, tile_rows))

    def run(block: tuple[int, int]):
        r0, r1 = block
        return _median_block(values_3d[:, r0:r1, :], valid_3d[:, r0:r1, :])

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]

    out_values = np.concatenate([r[0] for r in results], axis=0)
    out_valid = np.concatenate([r[1] for r in results], axis=0)
    return RasterGrid(out_values, out_valid, first.transform)


def threshold_mask(
    grid: RasterGrid, ndvi_min: float, ndvi_max: float
) -> ThresholdMask:
    """Binary self-masked classification of an index grid.

    Retained iff valid and ndvi_min <= value <= ndvi_max (both inclusive);
    retained pixels take value 1 and everything else carries no data.
    """
    if not -1.0 <= ndvi_min < ndvi_max <= 1.0:
        raise ValueError("thresholds must satisfy -1 <= min < max <= 1")
    # compare in float64: every float32 value is exactly representable, so
    # the inclusive bounds behave as real-number comparisons
    values = grid.values.astype(np.float64)
    retained = grid.valid & (values >= ndvi_min) & (values <= ndvi_max)
    values = retained.astype(np.uint8)
    return ThresholdMask(
        RasterGrid(values, retained, grid.transform), ndvi_min, ndvi_max
    )
