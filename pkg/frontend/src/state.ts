import {
  AnalysisOutcome,
  AnalyzeRequestBody,
  RoiVariant,
  SensorInfo,
  Violation,
} from './types.js';
import { Draft, validateDraft } from './validation.js';

// The region can come from drawing, from typed bbox corners, or from a
// boundary dataset; exactly one variant is active at a time.
export type RoiChoice =
  | { kind: 'polygon'; vertices: Array<[number, number]>; crs: string }
  | { kind: 'bbox'; bbox: [number, number, number, number]; crs: string }
  | { kind: 'dataset'; name: string; path: string[] };

export interface ConsoleState {
  registry: SensorInfo[] | null;
  registryError: string | null;
  draft: Draft;
  roi: RoiChoice | null;
  /** Vertex list while drawing is active, null otherwise. */
  drawing: Array<[number, number]> | null;
  drawCrs: string;
  drawError: string | null;
  /** Report from the last server 422, cleared on any edit. */
  serverReport: Violation[] | null;
  result: AnalysisOutcome | null;
  /** Hash of the request the shown result answers. */
  resultHash: string | null;
  busy: boolean;
  today: string;
}

export type Action =
  | { type: 'registry_loaded'; sensors: SensorInfo[] }
  | { type: 'registry_failed'; message: string }
  | { type: 'field_edited'; field: keyof Draft; value: string | number }
  | { type: 'threshold_slid'; field: 'ndvi_min' | 'ndvi_max'; value: number }
  | { type: 'draw_started'; crs: string }
  | { type: 'vertex_added'; x: number; y: number }
  | { type: 'ring_closed' }
  | { type: 'draw_cancelled' }
  | { type: 'bbox_entered'; bbox: [number, number, number, number]; crs: string }
  | { type: 'dataset_chosen'; name: string; path: string[] }
  | { type: 'roi_cleared' }
  | { type: 'analyze_started'; hash: string }
  | { type: 'analyze_succeeded'; hash: string; result: AnalysisOutcome }
  | { type: 'analyze_rejected'; hash: string; violations: Violation[] };

export function initialState(today: string): ConsoleState {
  return {
    registry: null,
    registryError: null,
    draft: {
      sensor_id: '',
      start_date: '',
      end_date: '',
      ndvi_min: -1,
      ndvi_max: 1,
      max_cloud_pct: 10,
    },
    roi: null,
    drawing: null,
    drawCrs: 'EPSG:4326',
    drawError: null,
    serverReport: null,
    result: null,
    resultHash: null,
    busy: false,
    today,
  };
}

const clampThreshold = (value: number): number =>
  Math.min(1, Math.max(-1, value));

function distinctVertices(vertices: Array<[number, number]>): number {
  const seen = new Set(vertices.map(([x, y]) => `${x}:${y}`));
  return seen.size;
}

/** Pure transition function; never mutates the incoming state. */
export function reduce(state: ConsoleState, action: Action): ConsoleState {
  switch (action.type) {
    case 'registry_loaded':
      return { ...state, registry: action.sensors, registryError: null };
    case 'registry_failed':
      return { ...state, registryError: action.message };
    case 'field_edited':
      return {
        ...state,
        draft: { ...state.draft, [action.field]: action.value },
        serverReport: null,
      };
    case 'threshold_slid':
      return {
        ...state,
        draft: {
          ...state.draft,
          [action.field]: clampThreshold(action.value),
        },
        serverReport: null,
      };
    case 'draw_started':
      return {
        ...state,
        drawing: [],
        drawCrs: action.crs,
        drawError: null,
      };
    case 'vertex_added': {
      if (state.drawing === null) {
        return state;
      }
      return {
        ...state,
        drawing: [...state.drawing, [action.x, action.y]],
        drawError: null,
      };
    }
    case 'ring_closed': {
      if (state.drawing === null) {
        return state;
      }
      if (distinctVertices(state.drawing) < 3) {
        return {
          ...state,
          drawError: 'a region needs at least 3 distinct corners',
        };
      }
      return {
        ...state,
        roi: { kind: 'polygon', vertices: state.drawing, crs: state.drawCrs },
        drawing: null,
        drawError: null,
        serverReport: null,
      };
    }
    case 'draw_cancelled':
      return { ...state, drawing: null, drawError: null };
    case 'bbox_entered':
      return {
        ...state,
        roi: { kind: 'bbox', bbox: action.bbox, crs: action.crs },
        drawing: null,
        drawError: null,
        serverReport: null,
      };
    case 'dataset_chosen':
      // A hierarchy pick replaces whatever was drawn.
      return {
        ...state,
        roi: { kind: 'dataset', name: action.name, path: action.path },
        drawing: null,
        drawError: null,
        serverReport: null,
      };
    case 'roi_cleared':
      return { ...state, roi: null };
    case 'analyze_started':
      return { ...state, busy: true };
    case 'analyze_succeeded':
      return {
        ...state,
        busy: false,
        result: action.result,
        resultHash: action.hash,
        serverReport: null,
      };
    case 'analyze_rejected':
      return { ...state, busy: false, serverReport: action.violations };
  }
}

export function localViolations(state: ConsoleState): Violation[] {
  return validateDraft(
    state.draft,
    state.registry ?? [],
    state.roi !== null,
    state.today,
  );
}

/** The Analyze action stays disabled until every local rule passes. */
export function canAnalyze(state: ConsoleState): boolean {
  return state.registry !== null && localViolations(state).length === 0;
}

export function roiVariant(roi: RoiChoice): RoiVariant {
  switch (roi.kind) {
    case 'polygon':
      return { polygon: roi.vertices, crs: roi.crs };
    case 'bbox':
      return { bbox: roi.bbox, crs: roi.crs };
    case 'dataset':
      return { dataset: { name: roi.name, path: roi.path } };
  }
}

/** Request body for the current form, or null while it cannot be sent. */
export function buildRequest(state: ConsoleState): AnalyzeRequestBody | null {
  if (!canAnalyze(state) || state.roi === null) {
    return null;
  }
  return {
    sensor_id: state.draft.sensor_id,
    start_date: state.draft.start_date,
    end_date: state.draft.end_date,
    ndvi_min: state.draft.ndvi_min,
    ndvi_max: state.draft.ndvi_max,
    max_cloud_pct: state.draft.max_cloud_pct,
    roi: roiVariant(state.roi),
  };
}
