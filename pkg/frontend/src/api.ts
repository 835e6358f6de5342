/** Thin JSON client for the explanation service; fetch is injectable so
 * tests can count and stub requests. */

import type {
  ExplainResponse,
  NeighbourhoodResponse,
  SessionResponse,
  SimplifyResponse,
} from './types.js';

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<ResponseLike>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export interface ExplainRequestBody {
  observation_index?: number | null;
  values?: (number | string)[] | null;
  target_class?: number | null;
  seed?: number;
  overrides?: Record<string, unknown>;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (globalThis.fetch as unknown as FetchLike),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await resp.json();
    if (!resp.ok) {
      const detail =
        typeof data === 'object' && data !== null
          ? ((data as Record<string, unknown>).message ??
             (data as Record<string, unknown>).detail ??
             JSON.stringify(data))
          : String(data);
      throw new ApiError(resp.status, String(detail));
    }
    return data as T;
  }

  createSession(body: Record<string, unknown>): Promise<SessionResponse> {
    return this.request('POST', '/sessions', body);
  }

  explain(sessionId: string, body: ExplainRequestBody): Promise<ExplainResponse> {
    return this.request('POST', `/sessions/${sessionId}/explain`, body);
  }

  simplify(sessionId: string, observationIndex: number, keep: string[]): Promise<SimplifyResponse> {
    return this.request('POST', `/sessions/${sessionId}/simplify`, {
      observation_index: observationIndex,
      keep,
    });
  }

  neighbourhood(sessionId: string, observationIndex: number): Promise<NeighbourhoodResponse> {
    return this.request('GET', `/sessions/${sessionId}/neighbourhood/${observationIndex}`);
  }

  report(sessionId: string): Promise<unknown> {
    return this.request('GET', `/sessions/${sessionId}/report`);
  }
}
