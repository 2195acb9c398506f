import { AnalysisOutcome, AnalyzeRequestBody } from './types.js';

/** The one client capability the loop needs; GatewayClient satisfies it. */
export interface AnalysisApi {
  analyze(body: AnalyzeRequestBody): Promise<AnalysisOutcome>;
}

/** JSON with object keys sorted, so equal requests hash equally. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== 'object') {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return '[' + value.map(stableStringify).join(',') + ']';
  }
  const record = value as Record<string, unknown>;
  const parts = Object.keys(record)
    .sort()
    .filter((k) => record[k] !== undefined)
    .map((k) => JSON.stringify(k) + ':' + stableStringify(record[k]));
  return '{' + parts.join(',') + '}';
}

/** FNV-1a over the canonical request text; collisions only cost one
 * redundant render, never a wrong one, so 32 bits is plenty. */
export function requestHash(body: AnalyzeRequestBody): string {
  const text = stableStringify(body);
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, '0');
}

export interface LoopHandlers {
  onResult(result: AnalysisOutcome, hash: string): void;
  onError(error: unknown, hash: string): void;
  onInFlight?(hash: string): void;
}

/**
 * Drives /analyze for a live control like the threshold sliders.
 *
 * Changes are debounced; each issued request carries the hash of its body,
 * and a response is rendered only if its hash still matches the newest
 * change. Anything older is counted in `dropped` and discarded, so the
 * readout can never show an area for thresholds the user has moved past.
 */
export class AnalysisLoop {
  dropped = 0;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private latestHash = '';

  constructor(
    private readonly client: AnalysisApi,
    private readonly handlers: LoopHandlers,
    private readonly debounceMs: number = 300,
  ) {}

  /** Register a parameter change; returns the hash it was assigned. */
  change(body: AnalyzeRequestBody): string {
    const hash = requestHash(body);
    this.latestHash = hash;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.issue(body, hash);
    }, this.debounceMs);
    return hash;
  }

  get pendingHash(): string {
    return this.latestHash;
  }

  private async issue(body: AnalyzeRequestBody, hash: string): Promise<void> {
    this.handlers.onInFlight?.(hash);
    try {
      const result = await this.client.analyze(body);
      if (hash !== this.latestHash) {
        this.dropped += 1;
        return;
      }
      this.handlers.onResult(result, hash);
    } catch (error) {
      if (hash !== this.latestHash) {
        this.dropped += 1;
        return;
      }
      this.handlers.onError(error, hash);
    }
  }
}
