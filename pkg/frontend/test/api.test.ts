import { describe, expect, it } from 'vitest';

import { FetchLike, GatewayClient, GatewayError } from '../src/api';
import { AnalyzeRequestBody } from '../src/types';

interface Recorded {
  url: string;
  init?: RequestInit;
}

function stubFetch(
  respond: (url: string) => Response | Promise<Response>,
): { fetchFn: FetchLike; requests: Recorded[] } {
  const requests: Recorded[] = [];
  return {
    requests,
    fetchFn: (url, init) => {
      requests.push({ url, init });
      return Promise.resolve(respond(url));
    },
  };
}

const json = (payload: unknown, status = 200): Response =>
  new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });

const BODY: AnalyzeRequestBody = {
  sensor_id: 'Sentinel-2',
  start_date: '2021-01-01',
  end_date: '2021-03-31',
  ndvi_min: -1,
  ndvi_max: 1,
  max_cloud_pct: 10,
  roi: { bbox: [0, 0, 1, 1], crs: 'EPSG:32646' },
};

describe('GatewayClient', () => {
  it('fetches the sensor registry', async () => {
    const { fetchFn, requests } = stubFetch(() => json({ sensors: [] }));
    const client = new GatewayClient('http://gw', fetchFn);
    await expect(client.sensors()).resolves.toEqual({ sensors: [] });
    expect(requests[0]?.url).toBe('http://gw/sensors');
  });

  it('trims trailing slashes off the base url', async () => {
    const { fetchFn, requests } = stubFetch(() => json({ sensors: [] }));
    await new GatewayClient('http://gw///', fetchFn).sensors();
    expect(requests[0]?.url).toBe('http://gw/sensors');
  });

  it('posts the analysis body as given', async () => {
    const { fetchFn, requests } = stubFetch(() =>
      json({ outcome: 'no_scenes', analysis_id: 'x', scene_count: 0, message: '', params: {} }),
    );
    const client = new GatewayClient('http://gw', fetchFn);
    await client.analyze(BODY);
    const request = requests[0];
    expect(request?.url).toBe('http://gw/analyze');
    expect(request?.init?.method).toBe('POST');
    expect(JSON.parse(String(request?.init?.body))).toEqual(BODY);
  });

  it('turns a 422 into a GatewayError carrying the violation report', async () => {
    const { fetchFn } = stubFetch(() =>
      json(
        {
          code: 'VALIDATION_FAILED',
          message: 'request parameters failed validation',
          report: {
            ok: false,
            violations: [
              { code: 'CLOUD_RANGE', field: 'max_cloud_pct', message: 'nope' },
            ],
          },
        },
        422,
      ),
    );
    const client = new GatewayClient('http://gw', fetchFn);
    const error = await client.analyze(BODY).catch((e: unknown) => e);
    expect(error).toBeInstanceOf(GatewayError);
    const gw = error as GatewayError;
    expect(gw.status).toBe(422);
    expect(gw.code).toBe('VALIDATION_FAILED');
    expect(gw.body.report?.violations.map((v) => v.code)).toEqual([
      'CLOUD_RANGE',
    ]);
  });

  it('passes the budget numbers through a 413', async () => {
    const { fetchFn } = stubFetch(() =>
      json(
        {
          code: 'PIXEL_BUDGET_EXCEEDED',
          message: 'too big',
          requested_pixels: 784,
          pixel_budget: 100,
        },
        413,
      ),
    );
    const error = (await new GatewayClient('http://gw', fetchFn)
      .analyze(BODY)
      .catch((e: unknown) => e)) as GatewayError;
    expect(error.body.requested_pixels).toBe(784);
    expect(error.body.pixel_budget).toBe(100);
  });

  it('encodes hierarchy steps as repeated path parameters', async () => {
    const { fetchFn, requests } = stubFetch(() => json({ children: ['a'] }));
    const client = new GatewayClient('http://gw', fetchFn);
    await expect(
      client.datasetChildren('admin', ['Atlantis', 'North reach']),
    ).resolves.toEqual(['a']);
    expect(requests[0]?.url).toBe(
      'http://gw/datasets/admin/children?path=Atlantis&path=North%20reach',
    );
  });

  it('lists root children without a query string', async () => {
    const { fetchFn, requests } = stubFetch(() => json({ children: [] }));
    await new GatewayClient('http://gw', fetchFn).datasetChildren('admin', []);
    expect(requests[0]?.url).toBe('http://gw/datasets/admin/children');
  });

  it('builds export urls and fetches raw bytes', async () => {
    const payload = new Uint8Array([0x49, 0x49, 0x2a, 0x00]);
    const { fetchFn, requests } = stubFetch(
      () => new Response(payload, { status: 200 }),
    );
    const client = new GatewayClient('http://gw', fetchFn);
    expect(client.exportUrl('abc', 'mask')).toBe('http://gw/export/abc/mask');
    const bytes = await client.fetchExport('abc', 'composite');
    expect(requests[0]?.url).toBe('http://gw/export/abc/composite');
    expect(new Uint8Array(bytes)).toEqual(payload);
  });

  it('maps a missing export to its error envelope', async () => {
    const { fetchFn } = stubFetch(() =>
      json({ code: 'UNKNOWN_ANALYSIS', message: 're-run the analysis' }, 404),
    );
    const error = (await new GatewayClient('http://gw', fetchFn)
      .fetchExport('gone', 'mask')
      .catch((e: unknown) => e)) as GatewayError;
    expect(error.status).toBe(404);
    expect(error.code).toBe('UNKNOWN_ANALYSIS');
  });
});
