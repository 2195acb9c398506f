import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { AnalysisApi, AnalysisLoop, requestHash, stableStringify } from '../src/loop';
import { AnalysisOutcome, AnalyzeRequestBody } from '../src/types';

const body = (ndviMin: number): AnalyzeRequestBody => ({
  sensor_id: 'Sentinel-2',
  start_date: '2021-01-01',
  end_date: '2021-03-31',
  ndvi_min: ndviMin,
  ndvi_max: 1,
  max_cloud_pct: 10,
  roi: { bbox: [0, 0, 10, 10], crs: 'EPSG:32646' },
});

const resultFor = (tag: string): AnalysisOutcome => ({
  outcome: 'ok',
  analysis_id: tag,
  area: { area_km2: 1, pixel_count: 1, pixel_area_basis: 'projected', crs: 'x' },
  scene_count: 1,
  series: [],
  composite_ref: '',
  mask_ref: '',
  scale_m: 10,
  params: {},
  warnings: [],
});

interface Deferred {
  body: AnalyzeRequestBody;
  resolve(value: AnalysisOutcome): void;
  reject(reason: unknown): void;
}

/** Client whose responses the test resolves by hand, in any order. */
function manualClient(): { api: AnalysisApi; calls: Deferred[] } {
  const calls: Deferred[] = [];
  return {
    calls,
    api: {
      analyze(requestBody) {
        return new Promise<AnalysisOutcome>((resolve, reject) => {
          calls.push({ body: requestBody, resolve, reject });
        });
      },
    },
  };
}

function recordingHandlers() {
  const rendered: Array<{ id: string; hash: string }> = [];
  const errors: unknown[] = [];
  return {
    rendered,
    errors,
    handlers: {
      onResult: (result: AnalysisOutcome, hash: string) => {
        rendered.push({ id: result.analysis_id, hash });
      },
      onError: (error: unknown) => {
        errors.push(error);
      },
    },
  };
}

describe('stableStringify and requestHash', () => {
  it('ignores object key order', () => {
    expect(stableStringify({ b: 1, a: [2, { d: 3, c: 4 }] })).toBe(
      stableStringify({ a: [2, { c: 4, d: 3 }], b: 1 }),
    );
  });

  it('hashes equal bodies equally and different bodies apart', () => {
    expect(requestHash(body(0.2))).toBe(requestHash(body(0.2)));
    expect(requestHash(body(0.2))).not.toBe(requestHash(body(0.3)));
    expect(requestHash(body(0.2))).toMatch(/^[0-9a-f]{8}$/);
  });
});

describe('AnalysisLoop', () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it('debounces: nothing is sent before the quiet period elapses', () => {
    const { api, calls } = manualClient();
    const { handlers } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    loop.change(body(0.1));
    vi.advanceTimersByTime(299);
    expect(calls).toHaveLength(0);
    vi.advanceTimersByTime(1);
    expect(calls).toHaveLength(1);
  });

  it('collapses a burst of slider moves into one request for the last value', () => {
    const { api, calls } = manualClient();
    const { handlers } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    loop.change(body(0.1));
    vi.advanceTimersByTime(100);
    loop.change(body(0.2));
    vi.advanceTimersByTime(100);
    loop.change(body(0.3));
    vi.advanceTimersByTime(300);

    expect(calls).toHaveLength(1);
    expect(calls[0]?.body.ndvi_min).toBe(0.3);
  });

  it('drops a stale response that arrives after a newer change', async () => {
    const { api, calls } = manualClient();
    const { handlers, rendered } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    loop.change(body(0.1));
    vi.advanceTimersByTime(300); // request A in flight
    loop.change(body(0.2));
    vi.advanceTimersByTime(300); // request B in flight
    expect(calls).toHaveLength(2);

    calls[1]?.resolve(resultFor('B'));
    await vi.runAllTimersAsync();
    calls[0]?.resolve(resultFor('A')); // out of order: A is stale now
    await vi.runAllTimersAsync();

    expect(rendered.map((r) => r.id)).toEqual(['B']);
    expect(loop.dropped).toBe(1);
  });

  it('drops the older response even when it arrives first', async () => {
    const { api, calls } = manualClient();
    const { handlers, rendered } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    loop.change(body(0.1));
    vi.advanceTimersByTime(300);
    loop.change(body(0.2));
    vi.advanceTimersByTime(300);

    calls[0]?.resolve(resultFor('A')); // superseded before it answered
    await vi.runAllTimersAsync();
    calls[1]?.resolve(resultFor('B'));
    await vi.runAllTimersAsync();

    expect(rendered.map((r) => r.id)).toEqual(['B']);
    expect(loop.dropped).toBe(1);
  });

  it('renders a response whose request equals the latest change', async () => {
    const { api, calls } = manualClient();
    const { handlers, rendered } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    const hash = loop.change(body(0.1));
    vi.advanceTimersByTime(300);
    calls[0]?.resolve(resultFor('A'));
    await vi.runAllTimersAsync();

    expect(rendered).toEqual([{ id: 'A', hash }]);
    expect(loop.dropped).toBe(0);
  });

  it('surfaces errors for the current request and swallows stale ones', async () => {
    const { api, calls } = manualClient();
    const { handlers, rendered, errors } = recordingHandlers();
    const loop = new AnalysisLoop(api, handlers, 300);

    loop.change(body(0.1));
    vi.advanceTimersByTime(300);
    calls[0]?.reject(new Error('boom'));
    await vi.runAllTimersAsync();
    expect(errors).toHaveLength(1);

    loop.change(body(0.2));
    vi.advanceTimersByTime(300);
    loop.change(body(0.3));
    vi.advanceTimersByTime(300);
    calls[1]?.reject(new Error('stale failure'));
    await vi.runAllTimersAsync();
    expect(errors).toHaveLength(1); // stale error never surfaced
    expect(loop.dropped).toBe(1);

    calls[2]?.resolve(resultFor('C'));
    await vi.runAllTimersAsync();
    expect(rendered.map((r) => r.id)).toEqual(['C']);
  });
});
