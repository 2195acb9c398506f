"""Self-contained baseline GeoTIFF reader/writer.

Supports exactly what the pipeline needs: uncompressed single-sample strips,
an axis-aligned geotransform (ModelPixelScale + ModelTiepoint, or a
ModelTransformation without rotation terms), an EPSG CRS geokey, and a
per-band nodata value via the GDAL_NODATA ASCII tag. Multi-band files are
read as one band per IFD. Tiled layouts, compression, and rotated
transforms are rejected rather than half-supported.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .errors import BandNotFound, RasterIOError, UnsupportedGeometry
from .raster import Crs, GeoTransform, RasterGrid

# TIFF tag ids
TAG_IMAGE_WIDTH = 256
TAG_IMAGE_LENGTH = 257
TAG_BITS_PER_SAMPLE = 258
TAG_COMPRESSION = 259
TAG_PHOTOMETRIC = 262
TAG_STRIP_OFFSETS = 273
TAG_SAMPLES_PER_PIXEL = 277
TAG_ROWS_PER_STRIP = 278
TAG_STRIP_BYTE_COUNTS = 279
TAG_PLANAR_CONFIG = 284
TAG_TILE_WIDTH = 322
TAG_SAMPLE_FORMAT = 339
TAG_MODEL_PIXEL_SCALE = 33550
TAG_MODEL_TIEPOINT = 33922
TAG_MODEL_TRANSFORMATION = 34264
TAG_GEO_KEY_DIRECTORY = 34735
TAG_GEO_DOUBLE_PARAMS = 34736
TAG_GEO_ASCII_PARAMS = 34737
TAG_GDAL_NODATA = 42113

# TIFF field types
TYPE_BYTE = 1
TYPE_ASCII = 2
TYPE_SHORT = 3
TYPE_LONG = 4
TYPE_DOUBLE = 12

_TYPE_SIZES = {TYPE_BYTE: 1, TYPE_ASCII: 1, TYPE_SHORT: 2, TYPE_LONG: 4, TYPE_DOUBLE: 8}
_TYPE_FORMATS = {TYPE_BYTE: "B", TYPE_SHORT: "H", TYPE_LONG: "I", TYPE_DOUBLE: "d"}

# GeoKey ids
KEY_MODEL_TYPE = 1024
KEY_RASTER_TYPE = 1025
KEY_GEOGRAPHIC_TYPE = 2048
KEY_PROJECTED_CS_TYPE = 3072

MODEL_TYPE_PROJECTED = 1
MODEL_TYPE_GEOGRAPHIC = 2
RASTER_PIXEL_IS_AREA = 1

# (sample_format, bits) -> numpy dtype character
_DTYPES = {
    (1, 8): "u1",
    (1, 16): "u2",
    (1, 32): "u4",
    (2, 16): "i2",
    (2, 32): "i4",
    (3, 32): "f4",
    (3, 64): "f8",
}

DEFAULT_NODATA = {
    "u1": 255,
    "u2": 65535,
    "u4": 2**32 - 1,
    "i2": -32768,
    "i4": -(2**31),
    "f4": float("nan"),
    "f8": float("nan"),
}


def _sample_format_for(dtype: np.dtype) -> int:
    if dtype.kind == "u":
        return 1
    if dtype.kind == "i":
        return 2
    if dtype.kind == "f":
        return 3
    raise RasterIOError(f"unsupported array dtype {dtype}")


class _IfdEntry:
    __slots__ = ("tag", "type", "values")

    def __init__(self, tag: int, type_: int, values):
        self.tag = tag
        self.type = type_
        self.values = values


def _parse_ifd(data: bytes, offset: int, bo: str) -> tuple[dict[int, _IfdEntry], int]:
    (count,) = struct.unpack_from(bo + "H", data, offset)
    entries: dict[int, _IfdEntry] = {}
    pos = offset + 2
    for _ in range(count):
        tag, type_, n = struct.unpack_from(bo + "HHI", data, pos)
        size = _TYPE_SIZES.get(type_)
        if size is None:
            pos += 12
            continue  # unknown field type: skip per TIFF spec
        total = size * n
        if total <= 4:
            raw = data[pos + 8 : pos + 8 + total]
        else:
            (value_offset,) = struct.unpack_from(bo + "I", data, pos + 8)
            raw = data[value_offset : value_offset + total]
        if type_ == TYPE_ASCII:
            values = raw.rstrip(b"\x00").decode("ascii", errors="replace")
        else:
            values = list(struct.unpack(bo + _TYPE_FORMATS[type_] * n, raw))
        entries[tag] = _IfdEntry(tag, type_, values)
        pos += 12
    (next_offset,) = struct.unpack_from(bo + "I", data, pos)
    return entries, next_offset


def _scalar(entries: dict[int, _IfdEntry], tag: int, default=None):
    entry = entries.get(tag)
    if entry is None:
        return default
    if isinstance(entry.values, str):
        return entry.values
    return entry.values[0]


def _crs_from_geokeys(entries: dict[int, _IfdEntry]) -> Crs:
    directory = entries.get(TAG_GEO_KEY_DIRECTORY)
    if directory is None:
        raise RasterIOError("not a GeoTIFF: missing GeoKeyDirectory tag")
    shorts = directory.values
    num_keys = shorts[3]
    keys: dict[int, int] = {}
    for i in range(num_keys):
        key_id, location, count, value = shorts[4 + 4 * i : 8 + 4 * i]
        if location == 0 and count == 1:
            keys[key_id] = value
    model = keys.get(KEY_MODEL_TYPE)
    if model == MODEL_TYPE_GEOGRAPHIC:
        return Crs("geographic", keys.get(KEY_GEOGRAPHIC_TYPE, 4326))
    if model == MODEL_TYPE_PROJECTED:
        epsg = keys.get(KEY_PROJECTED_CS_TYPE)
        if epsg is None:
            raise RasterIOError("projected GeoTIFF without ProjectedCSType geokey")
        return Crs("projected", epsg)
    raise RasterIOError(f"unsupported GeoTIFF model type {model}")


def _transform_from_tags(entries: dict[int, _IfdEntry], crs: Crs) -> GeoTransform:
    model = entries.get(TAG_MODEL_TRANSFORMATION)
    if model is not None:
        m = model.values
        if m[1] != 0.0 or m[4] != 0.0:
            raise UnsupportedGeometry("rotated geotransform is not supported")
        return GeoTransform(
            origin_x=m[3], origin_y=m[7], pixel_width=m[0], pixel_height=m[5], crs=crs
        )
    scale = entries.get(TAG_MODEL_PIXEL_SCALE)
    tie = entries.get(TAG_MODEL_TIEPOINT)
    if scale is None or tie is None:
        raise RasterIOError("not a GeoTIFF: missing pixel-scale/tiepoint tags")
    sx, sy = scale.values[0], scale.values[1]
    i, j, _k, x, y, _z = tie.values[:6]
    # shift an off-corner tiepoint back to pixel (0, 0)
    origin_x = x - i * sx
    origin_y = y + j * sy
    return GeoTransform(
        origin_x=origin_x, origin_y=origin_y, pixel_width=sx, pixel_height=-sy, crs=crs
    )


def _read_band_array(
    data: bytes, entries: dict[int, _IfdEntry], bo: str
) -> tuple[np.ndarray, float | None]:
    if TAG_TILE_WIDTH in entries:
        raise RasterIOError("tiled TIFF layout is not supported")
    if _scalar(entries, TAG_COMPRESSION, 1) != 1:
        raise RasterIOError("compressed TIFF is not supported")
    if _scalar(entries, TAG_SAMPLES_PER_PIXEL, 1) != 1:
        raise RasterIOError("chunky multi-sample TIFF is not supported; "
                            "expected one band per IFD")
    width = _scalar(entries, TAG_IMAGE_WIDTH)
    height = _scalar(entries, TAG_IMAGE_LENGTH)
    if not width or not height:
        raise RasterIOError("missing image dimensions")
    bits = _scalar(entries, TAG_BITS_PER_SAMPLE, 8)
    fmt = _scalar(entries, TAG_SAMPLE_FORMAT, 1)
    dtype_char = _DTYPES.get((fmt, bits))
    if dtype_char is None:
        raise RasterIOError(f"unsupported sample format {fmt}/{bits} bits")
    dtype = np.dtype(("<" if bo == "<" else ">") + dtype_char)

    offsets = entries.get(TAG_STRIP_OFFSETS)
    counts = entries.get(TAG_STRIP_BYTE_COUNTS)
    if offsets is None or counts is None:
        raise RasterIOError("missing strip layout tags")
    raw = b"".join(
        data[off : off + cnt] for off, cnt in zip(offsets.values, counts.values)
    )
    expected = width * height * dtype.itemsize
    if len(raw) < expected:
        raise RasterIOError("truncated pixel data")
    arr = np.frombuffer(raw[:expected], dtype=dtype).reshape(height, width)
    arr = arr.astype(arr.dtype.newbyteorder("="), copy=False)

    nodata_text = _scalar(entries, TAG_GDAL_NODATA)
    nodata = None
    if nodata_text is not None:
        try:
            nodata = float(nodata_text)
        except ValueError:
            nodata = None
    return arr, nodata


def read_geotiff(path: str | Path, band: int = 1) -> RasterGrid:
    """Read one band (1-based; one IFD per band) into a RasterGrid.

    Pixels equal to the declared nodata value (or NaN for float data) come
    back with ``valid == False``.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise RasterIOError(f"cannot read {path}: {exc}") from exc
    if len(data) < 8:
        raise RasterIOError(f"{path} is not a TIFF file")
    if data[:2] == b"II":
        bo = "<"
    elif data[:2] == b"MM":
        bo = ">"
    else:
        raise RasterIOError(f"{path} is not a TIFF file")
    magic, first_ifd = struct.unpack_from(bo + "HI", data, 2)
    if magic != 42:
        raise RasterIOError(f"{path} is not a TIFF file")

    entries = None
    offset = first_ifd
    seen = 0
    while offset:
        ifd, offset = _parse_ifd(data, offset, bo)
        seen += 1
        if seen == band:
            entries = ifd
            break
    if entries is None:
        raise BandNotFound(f"{path} has {seen} band(s); band {band} requested")

    arr, nodata = _read_band_array(data, entries, bo)
    crs = _crs_from_geokeys(entries)
    transform = _transform_from_tags(entries, crs)

    if arr.dtype.kind == "f":
        valid = ~np.isnan(arr)
        if nodata is not None and not math.isnan(nodata):
            valid &= arr != nodata
    elif nodata is not None:
        valid = arr != np.asarray(nodata).astype(arr.dtype)
    else:
        valid = np.ones(arr.shape, dtype=bool)
    return RasterGrid(arr, valid, transform)


def _encode_entry(tag: int, type_: int, values, bo: str) -> tuple[bytes, bytes]:
    """Return (12-byte entry with placeholder offset, out-of-line payload)."""
    if type_ == TYPE_ASCII:
        payload = values.encode("ascii") + b"\x00"
        n = len(payload)
    else:
        if not isinstance(values, (list, tuple)):
            values = [values]
        payload = struct.pack(bo + _TYPE_FORMATS[type_] * len(values), *values)
        n = len(values)
    header = struct.pack(bo + "HHI", tag, type_, n)
    if len(payload) <= 4:
        return header + payload.ljust(4, b"\x00"), b""
    return header + b"\x00\x00\x00\x00", payload


def _geokey_directory(crs: Crs) -> list[int]:
    keys = [
        (KEY_MODEL_TYPE, 0, 1,
         MODEL_TYPE_GEOGRAPHIC if crs.is_geographic else MODEL_TYPE_PROJECTED),
        (KEY_RASTER_TYPE, 0, 1, RASTER_PIXEL_IS_AREA),
    ]
    if crs.is_geographic:
        keys.append((KEY_GEOGRAPHIC_TYPE, 0, 1, crs.epsg))
    else:
        keys.append((KEY_PROJECTED_CS_TYPE, 0, 1, crs.epsg))
    shorts = [1, 1, 0, len(keys)]
    for key in keys:
        shorts.extend(key)
    return shorts


def write_geotiff(
    grid: RasterGrid, path: str | Path, nodata: float | None = None
) -> None:
    """Write a single-band uncompressed GeoTIFF.

    Invalid pixels are stored as ``nodata`` (dtype default when omitted:
    NaN for floats, 255 for uint8, 65535 for uint16) and the value is
    declared in the GDAL_NODATA tag so the validity mask round-trips.
    """
    path = Path(path)
    if grid.width == 0 or grid.height == 0:
        raise RasterIOError("refusing to write an empty grid")
    arr = np.ascontiguousarray(grid.values)
    dtype = arr.dtype.newbyteorder("<")
    dtype_char = dtype.str.lstrip("<>=|")
    if dtype_char not in DEFAULT_NODATA:
        raise RasterIOError(f"unsupported write dtype {arr.dtype}")
    if nodata is None:
        nodata = DEFAULT_NODATA[dtype_char]

    out = arr.astype(dtype, copy=True)
    if not grid.valid.all():
        fill = np.asarray(nodata).astype(dtype)
        out[~grid.valid] = fill
    elif arr.dtype.kind != "f" and np.any(arr == np.asarray(nodata).astype(dtype)):
        raise RasterIOError(
            "valid pixel equals the nodata value; pass an explicit nodata"
        )

    bo = "<"
    t = grid.transform
    nodata_text = "nan" if math.isnan(nodata) else repr(float(nodata))
    pixel_data = out.tobytes()

    fields = [
        (TAG_IMAGE_WIDTH, TYPE_LONG, grid.width),
        (TAG_IMAGE_LENGTH, TYPE_LONG, grid.height),
        (TAG_BITS_PER_SAMPLE, TYPE_SHORT, dtype.itemsize * 8),
        (TAG_COMPRESSION, TYPE_SHORT, 1),
        (TAG_PHOTOMETRIC, TYPE_SHORT, 1),
        (TAG_STRIP_OFFSETS, TYPE_LONG, [0]),  # patched below
        (TAG_SAMPLES_PER_PIXEL, TYPE_SHORT, 1),
        (TAG_ROWS_PER_STRIP, TYPE_LONG, grid.height),
        (TAG_STRIP_BYTE_COUNTS, TYPE_LONG, [len(pixel_data)]),
        (TAG_PLANAR_CONFIG, TYPE_SHORT, 1),
        (TAG_SAMPLE_FORMAT, TYPE_SHORT, _sample_format_for(dtype)),
        (TAG_MODEL_PIXEL_SCALE, TYPE_DOUBLE,
         [t.pixel_width, abs(t.pixel_height), 0.0]),
        (TAG_MODEL_TIEPOINT, TYPE_DOUBLE,
         [0.0, 0.0, 0.0, t.origin_x, t.origin_y, 0.0]),
        (TAG_GEO_KEY_DIRECTORY, TYPE_SHORT, _geokey_directory(t.crs)),
        (TAG_GDAL_NODATA, TYPE_ASCII, nodata_text),
    ]

    ifd_offset = 8
    ifd_size = 2 + 12 * len(fields) + 4
    overflow_offset = ifd_offset + ifd_size

    entry_blobs: list[bytes] = []
    overflow_blobs: list[bytes] = []
    patches: list[tuple[int, int]] = []  # (entry index, overflow offset)
    for tag, type_, values in fields:
        entry, payload = _encode_entry(tag, type_, values, bo)
        if payload:
            if overflow_offset % 2:
                overflow_blobs.append(b"\x00")
                overflow_offset += 1
            patches.append((len(entry_blobs), overflow_offset))
            overflow_blobs.append(payload)
            overflow_offset += len(payload)
        entry_blobs.append(entry)

    data_offset = overflow_offset + (overflow_offset % 2)
    for index, offset in patches:
        entry = entry_blobs[index]
        entry_blobs[index] = entry[:8] + struct.pack(bo + "I", offset)
    # patch StripOffsets now that the pixel data position is known
    strip_index = next(
        i for i, (tag, _, _) in enumerate(fields) if tag == TAG_STRIP_OFFSETS
    )
    entry = entry_blobs[strip_index]
    entry_blobs[strip_index] = entry[:8] + struct.pack(bo + "I", data_offset)

    blob = bytearray()
    blob += struct.pack(bo + "2sHI", b"II", 42, ifd_offset)
    blob += struct.pack(bo + "H", len(fields))
    for entry in entry_blobs:
        blob += entry
    blob += struct.pack(bo + "I", 0)  # no further IFDs
    for payload in overflow_blobs:
        blob += payload
    blob += b"\x00" * (data_offset - overflow_offset)
    blob += pixel_data

    try:
        path.write_bytes(bytes(blob))
    except OSError as exc:
        raise RasterIOError(f"cannot write {path}: {exc}") from exc
