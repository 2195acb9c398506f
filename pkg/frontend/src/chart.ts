import { SeriesPoint } from './types.js';

export type SeriesView =
  | { kind: 'empty'; placeholder: string }
  | { kind: 'series'; points: SeriesPoint[]; label: string };

/** Chart model: points in time order, scene count label, gap handling. */
export function seriesView(points: SeriesPoint[]): SeriesView {
  if (points.length === 0) {
    return { kind: 'empty', placeholder: 'no scenes found' };
  }
  const ordered = [...points].sort((a, b) =>
    a.timestamp === b.timestamp
      ? a.scene_id.localeCompare(b.scene_id)
      : a.timestamp.localeCompare(b.timestamp),
  );
  return {
    kind: 'series',
    points: ordered,
    label: `${ordered.length} images`,
  };
}

const PAD = 28;

/**
 * Render the series as an SVG string: one marker per scene with a mean,
 * polyline segments broken at scenes whose mean is absent so gaps stay
 * visible. The y axis is the full index range [-1, 1].
 */
export function seriesSvg(view: SeriesView, width = 640, height = 240): string {
  if (view.kind === 'empty') {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" ` +
      `class="placeholder">${view.placeholder}</text></svg>`
    );
  }
  const n = view.points.length;
  const xAt = (i: number): number =>
    n === 1 ? width / 2 : PAD + (i * (width - 2 * PAD)) / (n - 1);
  const yAt = (ndvi: number): number =>
    PAD + ((1 - ndvi) / 2) * (height - 2 * PAD);

  const segments: string[] = [];
  let current: string[] = [];
  const flush = (): void => {
    if (current.length > 1) {
      segments.push(
        `<polyline fill="none" stroke="#2e7d32" stroke-width="1.5" ` +
          `points="${current.join(' ')}"/>`,
      );
    }
    current = [];
  };

  const markers: string[] = [];
  view.points.forEach((p, i) => {
    if (p.mean_ndvi === null) {
      flush();
      return;
    }
    const x = xAt(i);
    const y = yAt(p.mean_ndvi);
    current.push(`${x.toFixed(1)},${y.toFixed(1)}`);
    markers.push(
      `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3" ` +
        `fill="#2e7d32"><title>${p.timestamp} ${p.mean_ndvi.toFixed(4)}` +
        `</title></circle>`,
    );
  });
  flush();

  const axis =
    `<line x1="${PAD}" y1="${yAt(0)}" x2="${width - PAD}" y2="${yAt(0)}" ` +
    `stroke="#bbb" stroke-dasharray="4 3"/>`;
  const label =
    `<text x="${width - PAD}" y="16" text-anchor="end" class="count">` +
    `${view.label}</text>`;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">` +
    axis +
    segments.join('') +
    markers.join('') +
    label +
    '</svg>'
  );
}

export interface RasterPixels {
  width: number;
  height: number;
  values: Float64Array;
  valid: Uint8Array;
}

export interface OverlayImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

/** Brown-to-green ramp over NDVI [-1, 1]; invalid pixels transparent. */
export function compositeOverlay(raster: RasterPixels): OverlayImage {
  const rgba = new Uint8ClampedArray(raster.width * raster.height * 4);
  for (let i = 0; i < raster.width * raster.height; i++) {
    if (!raster.valid[i]) {
      continue; // alpha stays 0
    }
    const v = raster.values[i] ?? 0;
    const t = Math.min(1, Math.max(0, (v + 1) / 2));
    rgba[i * 4] = Math.round(150 * (1 - t) + 20 * t);
    rgba[i * 4 + 1] = Math.round(100 * (1 - t) + 160 * t);
    rgba[i * 4 + 2] = Math.round(60 * (1 - t) + 40 * t);
    rgba[i * 4 + 3] = 255;
  }
  return { width: raster.width, height: raster.height, rgba };
}

/** Translucent highlight over retained pixels of the threshold mask. */
export function maskOverlay(raster: RasterPixels): OverlayImage {
  const rgba = new Uint8ClampedArray(raster.width * raster.height * 4);
  for (let i = 0; i < raster.width * raster.height; i++) {
    if (raster.valid[i] && raster.values[i] === 1) {
      rgba[i * 4] = 255;
      rgba[i * 4 + 1] = 235;
      rgba[i * 4 + 2] = 59;
      rgba[i * 4 + 3] = 160;
    }
  }
  return { width: raster.width, height: raster.height, rgba };
}

export function formatArea(areaKm2: number): string {
  return `${areaKm2.toFixed(4)} km²`;
}
