// Wire types for the gateway's JSON API. Field names match the documents
// the server emits; keep them snake_case so payloads need no mapping layer.

export interface SensorInfo {
  sensor_id: string;
  red_band: string;
  nir_band: string;
  qa_band: string;
  mask_scheme: string;
  reflectance_scale: number;
  reflectance_offset: number;
  availability_start: string;
  availability_end: string | null;
  native_scale_m: number;
  cloud_metadata_key: string;
}

export interface RegistryDocument {
  sensors: SensorInfo[];
}

export interface Violation {
  code: string;
  field: string;
  message: string;
}

export interface ValidationDocument {
  ok: boolean;
  violations: Violation[];
}

export interface DatasetQuery {
  name: string;
  path: string[];
}

export interface RoiVariant {
  polygon?: Array<[number, number]>;
  bbox?: [number, number, number, number];
  dataset?: DatasetQuery;
  crs?: string;
}

export interface AnalyzeRequestBody {
  sensor_id: string;
  start_date: string;
  end_date: string;
  ndvi_min: number;
  ndvi_max: number;
  max_cloud_pct: number;
  roi: RoiVariant | null;
}

export interface AreaReport {
  area_km2: number;
  pixel_count: number;
  pixel_area_basis: string;
  crs: string;
}

export interface SeriesPoint {
  timestamp: string;
  mean_ndvi: number | null;
  valid_pixel_count: number;
  scene_id: string;
}

export interface OkResult {
  outcome: 'ok';
  analysis_id: string;
  area: AreaReport;
  scene_count: number;
  series: SeriesPoint[];
  composite_ref: string;
  mask_ref: string;
  scale_m: number;
  params: Record<string, unknown>;
  warnings: string[];
}

export interface NoScenesResult {
  outcome: 'no_scenes';
  analysis_id: string;
  scene_count: number;
  message: string;
  params: Record<string, unknown>;
}

export type AnalysisOutcome = OkResult | NoScenesResult;

export interface ErrorBody {
  code: string;
  message: string;
  field?: string;
  report?: ValidationDocument;
  requested_pixels?: number;
  pixel_budget?: number;
}
