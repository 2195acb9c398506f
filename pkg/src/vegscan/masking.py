"""Cloud/QA masking and reflectance scaling, per sensor.

All operations are pure and pixelwise, hence trivially tile-parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch
from .raster import RasterGrid
from .sensors import SensorSpec

# Sentinel-2 SCL classes kept as clear: vegetation (4), non-vegetated (5),
# water (6), unclassified (7), snow (11). Everything else is discarded.
SCL_KEEP_CLASSES = frozenset({4, 5, 6, 7, 11})

# USGS Collection-2 Level-2 QA_PIXEL bit layout (categorical flags only;
# the confidence bit-pairs in bits 8-15 are deliberately ignored)
QA_BIT_FILL = 0
QA_BIT_DILATED_CLOUD = 1
QA_BIT_CIRRUS = 2
QA_BIT_CLOUD = 3
QA_BIT_CLOUD_SHADOW = 4


@dataclass(frozen=True)
class MaskScheme:
    scheme_id: str
    keep_classes: frozenset[int] = frozenset()
    mask_bits: frozenset[int] = frozenset()


SCL_SCHEME = MaskScheme("SCL", keep_classes=SCL_KEEP_CLASSES)
QA_L89_SCHEME = MaskScheme(
    "QA_L89",
    mask_bits=frozenset(
        {QA_BIT_DILATED_CLOUD, QA_BIT_CIRRUS, QA_BIT_CLOUD, QA_BIT_CLOUD_SHADOW}
    ),
)
# Landsat 5/7 have no cirrus band; only cloud and cloud shadow are flagged
QA_L57_SCHEME = MaskScheme(
    "QA_L57", mask_bits=frozenset({QA_BIT_CLOUD, QA_BIT_CLOUD_SHADOW})
)

MASK_SCHEMES = {
    "SCL": SCL_SCHEME,
    "QA_L89": QA_L89_SCHEME,
    "QA_L57": QA_L57_SCHEME,
}


def scheme_for(spec: SensorSpec) -> MaskScheme:
    return MASK_SCHEMES[spec.mask_scheme]


def scl_clear_mask(scl: RasterGrid) -> RasterGrid:
    """Boolean grid marking clear pixels per the SCL keep-set."""
    keep = np.isin(scl.values, sorted(SCL_KEEP_CLASSES))
    return RasterGrid(keep & scl.valid, scl.valid, scl.transform)


def qa_bitmask(scheme: MaskScheme) -> int:
    """Word of all bits that must be clear for a pixel to survive."""
    bits = 1 << QA_BIT_FILL
    for b in scheme.mask_bits:
        bits |= 1 << b
    return bits


def qa_pixel_mask(qa: RasterGrid, scheme: MaskScheme) -> RasterGrid:
    """Boolean grid from a 16-bit QA_PIXEL band.

    A pixel is kept iff none of the scheme's flag bits is set and the fill
    bit is clear.
    """
    if scheme.scheme_id not in ("QA_L89", "QA_L57"):
        raise ValueError(f"scheme {scheme.scheme_id} is not a QA_PIXEL scheme")
    words = qa.values.astype(np.uint16, copy=False)
    keep = (words & np.uint16(qa_bitmask(scheme))) == 0
    return RasterGrid(keep & qa.valid, qa.valid, qa.transform)


def scale_reflectance(dn: RasterGrid, spec: SensorSpec) -> RasterGrid:
    """Digital numbers -> surface reflectance: dn * scale + offset.

    Computed in float64 and stored as float32; validity is untouched. Out of
    range values are kept, not clipped: the median composite is the defense
    against residual artifacts.
    """
    scaled = dn.values.astype(np.float64) * spec.reflectance_scale
    scaled += spec.reflectance_offset
    return RasterGrid(scaled.astype(np.float32), dn.valid, dn.transform)


def apply_mask(grid: RasterGrid, mask: RasterGrid) -> RasterGrid:
    """Restrict a grid's validity by a boolean mask grid; values untouched."""
    if grid.shape != mask.shape or grid.transform != mask.transform:
        raise GridMismatch("mask does not align with grid")
    keep = mask.valid & mask.values.astype(bool)
    return RasterGrid(grid.values, grid.valid & keep, grid.transform)
