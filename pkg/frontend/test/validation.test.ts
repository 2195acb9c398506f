import { describe, expect, it } from 'vitest';

import { SensorInfo } from '../src/types';
import {
  CLOUD_RANGE,
  DATE_AFTER_SENSOR,
  DATE_BEFORE_SENSOR,
  DATE_ORDER,
  Draft,
  NDVI_ORDER,
  NDVI_RANGE,
  ROI_MISSING,
  UNKNOWN_SENSOR,
  dateBounds,
  findSensor,
  validateDraft,
} from '../src/validation';

// ---------------------------------------------------------------------------
// Independent oracle: one predicate per rule, working on parsed Date values
// instead of string comparison, so it shares no logic with the validator.

function oracleCodes(
  draft: Draft,
  registry: SensorInfo[],
  roiDefined: boolean,
  today: string,
): Set<string> {
  const codes = new Set<string>();
  const norm = (s: string): string =>
    s.trim().toLowerCase().replace(/[-_]/g, ' ');
  const sensor = registry.find((s) => norm(s.sensor_id) === norm(draft.sensor_id));
  const ms = (iso: string): number => new Date(iso + 'T00:00:00Z').getTime();

  if (sensor === undefined) {
    codes.add(UNKNOWN_SENSOR);
  } else {
    if (!draft.start_date || ms(draft.start_date) < ms(sensor.availability_start)) {
      codes.add(DATE_BEFORE_SENSOR);
    }
    const close = sensor.availability_end ?? today;
    if (!draft.end_date || ms(draft.end_date) > ms(close)) {
      codes.add(DATE_AFTER_SENSOR);
    }
  }
  if (
    draft.start_date &&
    draft.end_date &&
    ms(draft.end_date) < ms(draft.start_date)
  ) {
    codes.add(DATE_ORDER);
  }
  if (Math.abs(draft.ndvi_min) > 1 || Number.isNaN(draft.ndvi_min)) {
    codes.add(NDVI_RANGE);
  }
  if (Math.abs(draft.ndvi_max) > 1 || Number.isNaN(draft.ndvi_max)) {
    codes.add(NDVI_RANGE);
  }
  if (!(draft.ndvi_min < draft.ndvi_max)) {
    codes.add(NDVI_ORDER);
  }
  if (
    draft.max_cloud_pct < 0 ||
    draft.max_cloud_pct > 100 ||
    Number.isNaN(draft.max_cloud_pct)
  ) {
    codes.add(CLOUD_RANGE);
  }
  if (!roiDefined) {
    codes.add(ROI_MISSING);
  }
  return codes;
}

// Registry literal mirroring the gateway's /sensors document; the live
// suite re-checks parity against the served registry itself.
const REGISTRY: SensorInfo[] = [
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
  {
    sensor_id: 'Landsat 8',
    red_band: 'SR_B4',
    nir_band: 'SR_B5',
    qa_band: 'QA_PIXEL',
    mask_scheme: 'QA_L89',
    reflectance_scale: 0.0000275,
    reflectance_offset: -0.2,
    availability_start: '2013-04-11',
    availability_end: null,
    native_scale_m: 30,
    cloud_metadata_key: 'CLOUD_COVER',
  },
  {
    sensor_id: 'Landsat 5',
    red_band: 'SR_B3',
    nir_band: 'SR_B4',
    qa_band: 'QA_PIXEL',
    mask_scheme: 'QA_L57',
    reflectance_scale: 0.0000275,
    reflectance_offset: -0.2,
    availability_start: '1984-03-16',
    availability_end: '2012-05-05',
    native_scale_m: 30,
    cloud_metadata_key: 'CLOUD_COVER',
  },
];

const TODAY = '2024-06-01';

const goodDraft = (overrides: Partial<Draft> = {}): Draft => ({
  sensor_id: 'Sentinel-2',
  start_date: '2021-01-01',
  end_date: '2021-03-31',
  ndvi_min: -1,
  ndvi_max: 1,
  max_cloud_pct: 10,
  ...overrides,
});

const codesOf = (draft: Draft, roiDefined = true): string[] =>
  validateDraft(draft, REGISTRY, roiDefined, TODAY).map((v) => v.code);

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe('oracle sanity', () => {
  it('accepts the reference draft and rejects a bad one', () => {
    expect(oracleCodes(goodDraft(), REGISTRY, true, TODAY).size).toBe(0);
    const bad = oracleCodes(
      goodDraft({ ndvi_min: 0.9, ndvi_max: 0.2, max_cloud_pct: 250 }),
      REGISTRY,
      false,
      TODAY,
    );
    expect(bad).toEqual(new Set([NDVI_ORDER, CLOUD_RANGE, ROI_MISSING]));
  });
});

describe('validateDraft', () => {
  it('passes a fully valid draft', () => {
    expect(codesOf(goodDraft())).toEqual([]);
  });

  it('flags each rule from its own input, on its own field', () => {
    const cases: Array<[Partial<Draft>, string, string]> = [
      [{ start_date: '2016-06-01' }, DATE_BEFORE_SENSOR, 'start_date'],
      [
        { start_date: '2021-03-01', end_date: '2021-02-01' },
        DATE_ORDER,
        'end_date',
      ],
      [{ ndvi_min: 0.9, ndvi_max: 0.2 }, NDVI_ORDER, 'ndvi_min'],
      [{ ndvi_min: -1.5 }, NDVI_RANGE, 'ndvi_min'],
      [{ ndvi_max: 1.5 }, NDVI_RANGE, 'ndvi_max'],
      [{ max_cloud_pct: 101 }, CLOUD_RANGE, 'max_cloud_pct'],
    ];
    for (const [overrides, code, field] of cases) {
      const report = validateDraft(goodDraft(overrides), REGISTRY, true, TODAY);
      expect(report.map((v) => v.code)).toEqual([code]);
      expect(report.map((v) => v.field)).toEqual([field]);
    }
  });

  it('treats range endpoints and equal dates as valid', () => {
    expect(
      codesOf(
        goodDraft({
          start_date: '2021-02-01',
          end_date: '2021-02-01',
          ndvi_min: -1,
          ndvi_max: 1,
          max_cloud_pct: 100,
        }),
      ),
    ).toEqual([]);
    expect(codesOf(goodDraft({ max_cloud_pct: 0 }))).toEqual([]);
  });

  it('rejects equal thresholds', () => {
    expect(codesOf(goodDraft({ ndvi_min: 0.5, ndvi_max: 0.5 }))).toEqual([
      NDVI_ORDER,
    ]);
  });

  it('flags a missing region on the roi field', () => {
    const report = validateDraft(goodDraft(), REGISTRY, false, TODAY);
    expect(report.map((v) => v.code)).toEqual([ROI_MISSING]);
    expect(report[0]?.field).toBe('roi');
  });

  it('flags an unknown sensor and an empty selection', () => {
    expect(codesOf(goodDraft({ sensor_id: 'MODIS' }))).toEqual([UNKNOWN_SENSOR]);
    expect(codesOf(goodDraft({ sensor_id: '' }))).toEqual([UNKNOWN_SENSOR]);
  });

  it('resolves platform ids case- and separator-insensitively', () => {
    for (const id of ['sentinel-2', 'SENTINEL_2', 'Sentinel 2']) {
      expect(codesOf(goodDraft({ sensor_id: id }))).toEqual([]);
    }
  });

  it('closes open availability windows at today', () => {
    expect(
      codesOf(goodDraft({ start_date: '2024-05-01', end_date: '2024-07-01' })),
    ).toEqual([DATE_AFTER_SENSOR]);
    expect(
      codesOf(goodDraft({ start_date: '2024-05-01', end_date: '2024-06-01' })),
    ).toEqual([]);
  });

  it('keeps retired platforms inside their archive window', () => {
    expect(
      codesOf(
        goodDraft({
          sensor_id: 'Landsat 5',
          start_date: '2012-05-01',
          end_date: '2012-06-01',
        }),
      ),
    ).toEqual([DATE_AFTER_SENSOR]);
  });

  it('accumulates all violations in one pass', () => {
    const report = validateDraft(
      goodDraft({
        start_date: '2016-01-01',
        ndvi_min: 2,
        ndvi_max: -2,
        max_cloud_pct: -1,
      }),
      REGISTRY,
      false,
      TODAY,
    );
    expect(new Set(report.map((v) => v.code))).toEqual(
      new Set([
        DATE_BEFORE_SENSOR,
        NDVI_RANGE,
        NDVI_ORDER,
        CLOUD_RANGE,
        ROI_MISSING,
      ]),
    );
    expect(report.filter((v) => v.code === NDVI_RANGE)).toHaveLength(2);
  });

  it('matches the rule oracle over fuzzed drafts', () => {
    const rand = mulberry32(20240601);
    const sensorPool = [
      'Sentinel-2',
      'sentinel_2',
      'Landsat 8',
      'landsat-5',
      'MODIS',
      '',
    ];
    const randomDate = (): string => {
      const year = 1980 + Math.floor(rand() * 48);
      const month = 1 + Math.floor(rand() * 12);
      const day = 1 + Math.floor(rand() * 28);
      return `${year}-${String(month).padStart(2, '0')}-${String(day).padStart(2, '0')}`;
    };
    for (let i = 0; i < 500; i++) {
      const draft: Draft = {
        sensor_id: sensorPool[Math.floor(rand() * sensorPool.length)] ?? '',
        start_date: randomDate(),
        end_date: randomDate(),
        ndvi_min: rand() < 0.1 ? -1 : Math.round((rand() * 4 - 2) * 100) / 100,
        ndvi_max: rand() < 0.1 ? 1 : Math.round((rand() * 4 - 2) * 100) / 100,
        max_cloud_pct: Math.round((rand() * 200 - 50) * 10) / 10,
      };
      const roiDefined = rand() < 0.7;
      const got = new Set(
        validateDraft(draft, REGISTRY, roiDefined, TODAY).map((v) => v.code),
      );
      const want = oracleCodes(draft, REGISTRY, roiDefined, TODAY);
      expect(got, JSON.stringify(draft)).toEqual(want);
    }
  });
});

describe('dateBounds', () => {
  it('clamps the picker to each platform archive', () => {
    const s2 = findSensor(REGISTRY, 'Sentinel-2');
    const l5 = findSensor(REGISTRY, 'Landsat 5');
    expect(s2 && dateBounds(s2, TODAY)).toEqual({
      min: '2017-03-28',
      max: TODAY,
    });
    expect(l5 && dateBounds(l5, TODAY)).toEqual({
      min: '1984-03-16',
      max: '2012-05-05',
    });
  });
});
