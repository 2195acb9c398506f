import { SensorInfo, Violation } from './types.js';

// Rule codes, identical to the strings the gateway reports so a 422 can be
// matched against locally flagged fields.
export const DATE_BEFORE_SENSOR = 'DATE_BEFORE_SENSOR';
export const DATE_AFTER_SENSOR = 'DATE_AFTER_SENSOR';
export const DATE_ORDER = 'DATE_ORDER';
export const NDVI_ORDER = 'NDVI_ORDER';
export const NDVI_RANGE = 'NDVI_RANGE';
export const CLOUD_RANGE = 'CLOUD_RANGE';
export const ROI_MISSING = 'ROI_MISSING';
export const UNKNOWN_SENSOR = 'UNKNOWN_SENSOR';

/** Form values as entered; dates are ISO YYYY-MM-DD strings ('' = unset). */
export interface Draft {
  sensor_id: string;
  start_date: string;
  end_date: string;
  ndvi_min: number;
  ndvi_max: number;
  max_cloud_pct: number;
}

function canonicalId(id: string): string {
  return id.trim().toLowerCase().replace(/-/g, ' ').replace(/_/g, ' ');
}

export function findSensor(
  registry: SensorInfo[],
  sensorId: string,
): SensorInfo | undefined {
  const wanted = canonicalId(sensorId);
  return registry.find((s) => canonicalId(s.sensor_id) === wanted);
}

export function isoToday(): string {
  return new Date().toISOString().slice(0, 10);
}

/** Date-picker limits for one platform; open windows close at today. */
export function dateBounds(
  sensor: SensorInfo,
  today: string = isoToday(),
): { min: string; max: string } {
  return {
    min: sensor.availability_start,
    max: sensor.availability_end ?? today,
  };
}

/**
 * Mirror of the server's parameter rules so the form can flag problems
 * before submitting. Same codes, same flagged fields, same accumulate-all
 * behavior; the server report stays authoritative when they disagree.
 *
 * ISO date strings order lexicographically, so no Date parsing is needed.
 */
export function validateDraft(
  draft: Draft,
  registry: SensorInfo[],
  roiDefined: boolean,
  today: string = isoToday(),
): Violation[] {
  const violations: Violation[] = [];
  const sensor = findSensor(registry, draft.sensor_id);

  if (!sensor) {
    violations.push({
      code: UNKNOWN_SENSOR,
      field: 'sensor_id',
      message: draft.sensor_id
        ? `unknown sensor '${draft.sensor_id}'`
        : 'choose a platform',
    });
  } else {
    if (!draft.start_date || draft.start_date < sensor.availability_start) {
      violations.push({
        code: DATE_BEFORE_SENSOR,
        field: 'start_date',
        message: `${sensor.sensor_id} data begins ${sensor.availability_start}`,
      });
    }
    const windowEnd = sensor.availability_end ?? today;
    if (!draft.end_date || draft.end_date > windowEnd) {
      violations.push({
        code: DATE_AFTER_SENSOR,
        field: 'end_date',
        message: `${sensor.sensor_id} data ends ${windowEnd}`,
      });
    }
  }
  if (draft.start_date && draft.end_date && draft.end_date < draft.start_date) {
    violations.push({
      code: DATE_ORDER,
      field: 'end_date',
      message: 'end date precedes start date',
    });
  }

  for (const field of ['ndvi_min', 'ndvi_max'] as const) {
    const value = draft[field];
    if (!(value >= -1 && value <= 1)) {
      violations.push({
        code: NDVI_RANGE,
        field,
        message: `${field}=${value} outside [-1, 1]`,
      });
    }
  }
  if (!(draft.ndvi_min < draft.ndvi_max)) {
    violations.push({
      code: NDVI_ORDER,
      field: 'ndvi_min',
      message: 'minimum NDVI threshold must be strictly below the maximum',
    });
  }

  if (!(draft.max_cloud_pct >= 0 && draft.max_cloud_pct <= 100)) {
    violations.push({
      code: CLOUD_RANGE,
      field: 'max_cloud_pct',
      message: `cloud cover ${draft.max_cloud_pct} outside [0, 100]`,
    });
  }

  if (!roiDefined) {
    violations.push({
      code: ROI_MISSING,
      field: 'roi',
      message: 'no region of interest defined',
    });
  }

  return violations;
}
