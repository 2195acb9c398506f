// Decoder for the gateway's export rasters: single-band uncompressed
// GeoTIFF with strip layout, a pixel-scale/tiepoint geotransform, an EPSG
// geokey, and the nodata value in the GDAL_NODATA ASCII tag. Anything the
// gateway never produces (tiles, compression, multi-sample) is rejected.

const TAG_IMAGE_WIDTH = 256;
const TAG_IMAGE_LENGTH = 257;
const TAG_BITS_PER_SAMPLE = 258;
const TAG_COMPRESSION = 259;
const TAG_STRIP_OFFSETS = 273;
const TAG_SAMPLES_PER_PIXEL = 277;
const TAG_STRIP_BYTE_COUNTS = 279;
const TAG_TILE_WIDTH = 322;
const TAG_SAMPLE_FORMAT = 339;
const TAG_MODEL_PIXEL_SCALE = 33550;
const TAG_MODEL_TIEPOINT = 33922;
const TAG_GEO_KEY_DIRECTORY = 34735;
const TAG_GDAL_NODATA = 42113;

const KEY_MODEL_TYPE = 1024;
const KEY_GEOGRAPHIC_TYPE = 2048;
const KEY_PROJECTED_CS_TYPE = 3072;

const TYPE_SIZES: Record<number, number> = {
  1: 1, // BYTE
  2: 1, // ASCII
  3: 2, // SHORT
  4: 4, // LONG
  12: 8, // DOUBLE
};

export interface DecodedRaster {
  width: number;
  height: number;
  values: Float64Array;
  valid: Uint8Array;
  originX: number;
  originY: number;
  pixelWidth: number;
  pixelHeight: number;
  epsg: number;
  geographic: boolean;
  nodata: number | null;
}

interface Field {
  type: number;
  numbers: number[];
  text: string | null;
}

export class TiffError extends Error {}

function readValue(view: DataView, offset: number, type: number, le: boolean): number {
  switch (type) {
    case 1:
      return view.getUint8(offset);
    case 3:
      return view.getUint16(offset, le);
    case 4:
      return view.getUint32(offset, le);
    case 12:
      return view.getFloat64(offset, le);
    default:
      throw new TiffError(`unsupported field type ${type}`);
  }
}

function parseIfd(view: DataView, offset: number, le: boolean): Map<number, Field> {
  const count = view.getUint16(offset, le);
  const fields = new Map<number, Field>();
  for (let i = 0; i < count; i++) {
    const pos = offset + 2 + 12 * i;
    const tag = view.getUint16(pos, le);
    const type = view.getUint16(pos + 2, le);
    const n = view.getUint32(pos + 4, le);
    const size = TYPE_SIZES[type];
    if (size === undefined) {
      continue; // unknown field type: skip
    }
    const total = size * n;
    const valueAt = total <= 4 ? pos + 8 : view.getUint32(pos + 8, le);
    if (type === 2) {
      let text = '';
      for (let j = 0; j < n; j++) {
        const ch = view.getUint8(valueAt + j);
        if (ch === 0) {
          break;
        }
        text += String.fromCharCode(ch);
      }
      fields.set(tag, { type, numbers: [], text });
    } else {
      const numbers: number[] = [];
      for (let j = 0; j < n; j++) {
        numbers.push(readValue(view, valueAt + j * size, type, le));
      }
      fields.set(tag, { type, numbers, text: null });
    }
  }
  return fields;
}

function scalar(fields: Map<number, Field>, tag: number, fallback?: number): number {
  const field = fields.get(tag);
  if (!field || field.numbers.length === 0) {
    if (fallback !== undefined) {
      return fallback;
    }
    throw new TiffError(`missing required tag ${tag}`);
  }
  return field.numbers[0] as number;
}

function readSamples(
  view: DataView,
  offset: number,
  count: number,
  format: number,
  bits: number,
  le: boolean,
): Float64Array {
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    if (format === 1 && bits === 8) {
      out[i] = view.getUint8(offset + i);
    } else if (format === 1 && bits === 16) {
      out[i] = view.getUint16(offset + i * 2, le);
    } else if (format === 1 && bits === 32) {
      out[i] = view.getUint32(offset + i * 4, le);
    } else if (format === 2 && bits === 16) {
      out[i] = view.getInt16(offset + i * 2, le);
    } else if (format === 2 && bits === 32) {
      out[i] = view.getInt32(offset + i * 4, le);
    } else if (format === 3 && bits === 32) {
      out[i] = view.getFloat32(offset + i * 4, le);
    } else if (format === 3 && bits === 64) {
      out[i] = view.getFloat64(offset + i * 8, le);
    } else {
      throw new TiffError(`unsupported sample format ${format}/${bits} bits`);
    }
  }
  return out;
}

export function decodeTiff(buffer: ArrayBuffer): DecodedRaster {
  const view = new DataView(buffer);
  if (buffer.byteLength < 8) {
    throw new TiffError('not a TIFF file');
  }
  const order = String.fromCharCode(view.getUint8(0), view.getUint8(1));
  let le: boolean;
  if (order === 'II') {
    le = true;
  } else if (order === 'MM') {
    le = false;
  } else {
    throw new TiffError('not a TIFF file');
  }
  if (view.getUint16(2, le) !== 42) {
    throw new TiffError('not a TIFF file');
  }

  const fields = parseIfd(view, view.getUint32(4, le), le);
  if (fields.has(TAG_TILE_WIDTH)) {
    throw new TiffError('tiled layout is not supported');
  }
  if (scalar(fields, TAG_COMPRESSION, 1) !== 1) {
    throw new TiffError('compressed data is not supported');
  }
  if (scalar(fields, TAG_SAMPLES_PER_PIXEL, 1) !== 1) {
    throw new TiffError('expected a single sample per pixel');
  }

  const width = scalar(fields, TAG_IMAGE_WIDTH);
  const height = scalar(fields, TAG_IMAGE_LENGTH);
  const bits = scalar(fields, TAG_BITS_PER_SAMPLE, 8);
  const format = scalar(fields, TAG_SAMPLE_FORMAT, 1);
  const bytesPerSample = bits / 8;

  const offsets = fields.get(TAG_STRIP_OFFSETS);
  const counts = fields.get(TAG_STRIP_BYTE_COUNTS);
  if (!offsets || !counts) {
    throw new TiffError('missing strip layout tags');
  }

  const values = new Float64Array(width * height);
  let written = 0;
  for (let s = 0; s < offsets.numbers.length; s++) {
    const stripOffset = offsets.numbers[s] as number;
    const byteCount = counts.numbers[s] as number;
    const samples = Math.min(
      Math.floor(byteCount / bytesPerSample),
      width * height - written,
    );
    values.set(
      readSamples(view, stripOffset, samples, format, bits, le),
      written,
    );
    written += samples;
  }
  if (written < width * height) {
    throw new TiffError('truncated pixel data');
  }

  const nodataText = fields.get(TAG_GDAL_NODATA)?.text ?? null;
  let nodata: number | null = null;
  if (nodataText !== null) {
    const parsed = Number(nodataText);
    nodata = Number.isNaN(parsed) && nodataText.trim() !== 'nan' ? null : parsed;
  }

  const valid = new Uint8Array(width * height);
  for (let i = 0; i < valid.length; i++) {
    const v = values[i] as number;
    if (Number.isNaN(v)) {
      continue;
    }
    if (nodata !== null && v === nodata) {
      continue;
    }
    valid[i] = 1;
  }

  const geokeys = fields.get(TAG_GEO_KEY_DIRECTORY);
  if (!geokeys) {
    throw new TiffError('not a GeoTIFF: missing geokey directory');
  }
  const shorts = geokeys.numbers;
  const numKeys = shorts[3] ?? 0;
  const keys = new Map<number, number>();
  for (let i = 0; i < numKeys; i++) {
    const keyId = shorts[4 + 4 * i];
    const location = shorts[5 + 4 * i];
    const value = shorts[7 + 4 * i];
    if (location === 0 && keyId !== undefined && value !== undefined) {
      keys.set(keyId, value);
    }
  }
  const geographic = keys.get(KEY_MODEL_TYPE) === 2;
  const epsg =
    (geographic ? keys.get(KEY_GEOGRAPHIC_TYPE) : keys.get(KEY_PROJECTED_CS_TYPE)) ??
    (geographic ? 4326 : 0);

  const scale = fields.get(TAG_MODEL_PIXEL_SCALE);
  const tie = fields.get(TAG_MODEL_TIEPOINT);
  if (!scale || !tie) {
    throw new TiffError('not a GeoTIFF: missing geotransform tags');
  }
  const sx = scale.numbers[0] as number;
  const sy = scale.numbers[1] as number;
  const [i0, j0, , x0, y0] = tie.numbers as [
    number,
    number,
    number,
    number,
    number,
  ];

  return {
    width,
    height,
    values,
    valid,
    originX: x0 - i0 * sx,
    originY: y0 + j0 * sy,
    pixelWidth: sx,
    pixelHeight: -sy,
    epsg,
    geographic,
    nodata,
  };
}
