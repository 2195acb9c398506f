import {
  AnalysisOutcome,
  AnalyzeRequestBody,
  ErrorBody,
  RegistryDocument,
  ValidationDocument,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx gateway answer, carrying the parsed error envelope. */
export class GatewayError extends Error {
  constructor(readonly status: number, readonly body: ErrorBody) {
    super(`${body.code}: ${body.message}`);
    this.name = 'GatewayError';
  }

  get code(): string {
    return this.body.code;
  }
}

const defaultFetch: FetchLike = (url, init) => fetch(url, init);

export class GatewayClient {
  private readonly baseUrl: string;

  constructor(baseUrl: string, private readonly fetchFn: FetchLike = defaultFetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    const body = await res.json();
    if (!res.ok) {
      throw new GatewayError(res.status, body as ErrorBody);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  sensors(): Promise<RegistryDocument> {
    return this.request<RegistryDocument>('/sensors');
  }

  validate(body: AnalyzeRequestBody): Promise<ValidationDocument> {
    return this.post<ValidationDocument>('/validate', body);
  }

  analyze(body: AnalyzeRequestBody): Promise<AnalysisOutcome> {
    return this.post<AnalysisOutcome>('/analyze', body);
  }

  async datasetChildren(name: string, path: string[]): Promise<string[]> {
    const query = path.map((p) => 'path=' + encodeURIComponent(p)).join('&');
    const suffix = query ? '?' + query : '';
    const doc = await this.request<{ children: string[] }>(
      `/datasets/${encodeURIComponent(name)}/children${suffix}`,
    );
    return doc.children;
  }

  exportUrl(analysisId: string, kind: 'composite' | 'mask'): string {
    return `${this.baseUrl}/export/${analysisId}/${kind}`;
  }

  async fetchExport(
    analysisId: string,
    kind: 'composite' | 'mask',
  ): Promise<ArrayBuffer> {
    const res = await this.fetchFn(this.exportUrl(analysisId, kind));
    if (!res.ok) {
      throw new GatewayError(res.status, (await res.json()) as ErrorBody);
    }
    return res.arrayBuffer();
  }
}
