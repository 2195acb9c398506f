import { describe, expect, it } from 'vitest';

import {
  Action,
  ConsoleState,
  buildRequest,
  canAnalyze,
  initialState,
  localViolations,
  reduce,
} from '../src/state';
import { OkResult, SensorInfo } from '../src/types';

const SENSORS: SensorInfo[] = [
  {
    sensor_id: 'Sentinel-2',
    red_band: 'B4',
    nir_band: 'B8',
    qa_band: 'SCL',
    mask_scheme: 'SCL',
    reflectance_scale: 0.0001,
    reflectance_offset: 0,
    availability_start: '2017-03-28',
    availability_end: null,
    native_scale_m: 10,
    cloud_metadata_key: 'CLOUDY_PIXEL_PERCENTAGE',
  },
];

const TODAY = '2024-06-01';

function deepFreeze<T>(value: T): T {
  if (value && typeof value === 'object') {
    Object.values(value as object).forEach(deepFreeze);
    Object.freeze(value);
  }
  return value;
}

/** Apply actions with every intermediate state frozen: any mutation throws. */
function play(actions: Action[], from?: ConsoleState): ConsoleState {
  let state = from ?? initialState(TODAY);
  for (const action of actions) {
    state = reduce(deepFreeze(state), action);
  }
  return state;
}

const readyActions: Action[] = [
  { type: 'registry_loaded', sensors: SENSORS },
  { type: 'field_edited', field: 'sensor_id', value: 'Sentinel-2' },
  { type: 'field_edited', field: 'start_date', value: '2021-01-01' },
  { type: 'field_edited', field: 'end_date', value: '2021-03-31' },
  { type: 'bbox_entered', bbox: [0, 0, 100, 100], crs: 'EPSG:32646' },
];

const okResult: OkResult = {
  outcome: 'ok',
  analysis_id: 'abc123',
  area: {
    area_km2: 0.0784,
    pixel_count: 784,
    pixel_area_basis: 'projected',
    crs: 'EPSG:32646',
  },
  scene_count: 4,
  series: [],
  composite_ref: 'exports/abc123/composite',
  mask_ref: 'exports/abc123/mask',
  scale_m: 10,
  params: {},
  warnings: [],
};

describe('analyze gating', () => {
  it('starts disabled: no registry, no sensor, no region', () => {
    const state = initialState(TODAY);
    expect(canAnalyze(state)).toBe(false);
    expect(buildRequest(state)).toBeNull();
  });

  it('enables only once every local rule passes', () => {
    const state = play(readyActions);
    expect(localViolations(state)).toEqual([]);
    expect(canAnalyze(state)).toBe(true);
    expect(buildRequest(state)).toEqual({
      sensor_id: 'Sentinel-2',
      start_date: '2021-01-01',
      end_date: '2021-03-31',
      ndvi_min: -1,
      ndvi_max: 1,
      max_cloud_pct: 10,
      roi: { bbox: [0, 0, 100, 100], crs: 'EPSG:32646' },
    });
  });

  it('stays disabled while any violation remains', () => {
    const noRoi = play(readyActions.slice(0, 4));
    expect(canAnalyze(noRoi)).toBe(false);
    expect(localViolations(noRoi).map((v) => v.code)).toEqual(['ROI_MISSING']);

    const badOrder = play([
      ...readyActions,
      { type: 'field_edited', field: 'ndvi_min', value: 0.9 },
      { type: 'field_edited', field: 'ndvi_max', value: 0.2 },
    ]);
    expect(canAnalyze(badOrder)).toBe(false);
    expect(buildRequest(badOrder)).toBeNull();
  });
});

describe('threshold sliders', () => {
  it('clamps slides to the index range [-1, 1]', () => {
    const state = play([
      { type: 'threshold_slid', field: 'ndvi_max', value: 1.7 },
      { type: 'threshold_slid', field: 'ndvi_min', value: -4 },
    ]);
    expect(state.draft.ndvi_max).toBe(1);
    expect(state.draft.ndvi_min).toBe(-1);
  });

  it('keeps in-range slides untouched', () => {
    const state = play([
      { type: 'threshold_slid', field: 'ndvi_min', value: 0.25 },
    ]);
    expect(state.draft.ndvi_min).toBe(0.25);
  });
});

describe('polygon drawing', () => {
  const rectangleClicks: Action[] = [
    { type: 'draw_started', crs: 'EPSG:32646' },
    { type: 'vertex_added', x: 0, y: 0 },
    { type: 'vertex_added', x: 100, y: 0 },
    { type: 'vertex_added', x: 100, y: 80 },
    { type: 'vertex_added', x: 0, y: 80 },
    { type: 'ring_closed' },
  ];

  it('turns four clicks into a four-vertex region', () => {
    const state = play(rectangleClicks);
    expect(state.roi).toEqual({
      kind: 'polygon',
      vertices: [
        [0, 0],
        [100, 0],
        [100, 80],
        [0, 80],
      ],
      crs: 'EPSG:32646',
    });
    expect(state.drawing).toBeNull();
    expect(state.drawError).toBeNull();
  });

  it('refuses to close a two-click ring and keeps the vertices', () => {
    const state = play([
      { type: 'draw_started', crs: 'EPSG:32646' },
      { type: 'vertex_added', x: 0, y: 0 },
      { type: 'vertex_added', x: 100, y: 0 },
      { type: 'ring_closed' },
    ]);
    expect(state.drawError).toMatch(/3 distinct corners/);
    expect(state.roi).toBeNull();
    expect(state.drawing).toHaveLength(2);
  });

  it('counts distinct corners, not raw clicks', () => {
    const state = play([
      { type: 'draw_started', crs: 'EPSG:32646' },
      { type: 'vertex_added', x: 5, y: 5 },
      { type: 'vertex_added', x: 5, y: 5 },
      { type: 'vertex_added', x: 9, y: 9 },
      { type: 'ring_closed' },
    ]);
    expect(state.drawError).toMatch(/3 distinct corners/);
    expect(state.roi).toBeNull();
  });

  it('ignores clicks while drawing mode is off', () => {
    const state = play([{ type: 'vertex_added', x: 1, y: 2 }]);
    expect(state.drawing).toBeNull();
  });

  it('lets a hierarchy selection replace the drawn region', () => {
    const state = play([
      ...rectangleClicks,
      { type: 'dataset_chosen', name: 'admin', path: ['Atlantis', 'Northreach'] },
    ]);
    expect(state.roi).toEqual({
      kind: 'dataset',
      name: 'admin',
      path: ['Atlantis', 'Northreach'],
    });
  });

  it('cancelling drawing keeps the previous region', () => {
    const state = play([
      ...rectangleClicks,
      { type: 'draw_started', crs: 'EPSG:32646' },
      { type: 'vertex_added', x: 1, y: 1 },
      { type: 'draw_cancelled' },
    ]);
    expect(state.roi?.kind).toBe('polygon');
    expect(state.drawing).toBeNull();
  });
});

describe('server responses', () => {
  it('stores results with the hash they answer', () => {
    const state = play([
      ...readyActions,
      { type: 'analyze_started', hash: 'h1' },
      { type: 'analyze_succeeded', hash: 'h1', result: okResult },
    ]);
    expect(state.busy).toBe(false);
    expect(state.result).toBe(okResult);
    expect(state.resultHash).toBe('h1');
  });

  it('keeps the server report until the next edit', () => {
    const rejected = play([
      ...readyActions,
      { type: 'analyze_started', hash: 'h2' },
      {
        type: 'analyze_rejected',
        hash: 'h2',
        violations: [
          { code: 'CLOUD_RANGE', field: 'max_cloud_pct', message: 'nope' },
        ],
      },
    ]);
    expect(rejected.serverReport?.map((v) => v.code)).toEqual(['CLOUD_RANGE']);

    const edited = play(
      [{ type: 'field_edited', field: 'max_cloud_pct', value: 20 }],
      rejected,
    );
    expect(edited.serverReport).toBeNull();
  });

  it('builds dataset requests with the dataset variant', () => {
    const state = play([
      ...readyActions.slice(0, 4),
      { type: 'dataset_chosen', name: 'admin', path: ['Atlantis'] },
    ]);
    expect(buildRequest(state)?.roi).toEqual({
      dataset: { name: 'admin', path: ['Atlantis'] },
    });
  });
});
