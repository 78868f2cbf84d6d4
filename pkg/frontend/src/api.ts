/** Thin typed client over the review service's HTTP routes. Every call
 * funnels through one request helper so tests can trace raw responses. */

import type {
  ArcResponse,
  InitialResponse,
  MetricsDocument,
  NextResponse,
  Prediction,
  ReliabilityResponse,
  SessionInfo,
} from './types.js';

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly reason: string,
  ) {
    super(`service error ${status}: ${reason}`);
    this.name = 'ServiceError';
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; text(): Promise<string> }>;

/** Called with every raw response body; used by protocol-conformance tests
 * to scan traces for guidance leakage. */
export type ResponseTracer = (url: string, status: number, body: string) => void;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
    private readonly trace: ResponseTracer = () => {},
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    this.trace(path, res.status, text);
    if (res.status >= 400) {
      let reason = `HTTP ${res.status}`;
      try {
        const detail = JSON.parse(text).detail;
        if (detail && typeof detail.reason === 'string') reason = detail.reason;
      } catch {
        // non-JSON error body: keep the status-based reason
      }
      throw new ServiceError(res.status, reason);
    }
    return JSON.parse(text) as T;
  }

  createSession(participantId: string, seed = 0): Promise<SessionInfo> {
    return this.request('POST', '/sessions', {
      participant_id: participantId,
      seed,
    });
  }

  nextCase(sessionId: string): Promise<NextResponse> {
    return this.request('GET', `/sessions/${sessionId}/next`);
  }

  submitInitial(
    sessionId: string,
    caseId: string,
    prediction: Prediction,
  ): Promise<InitialResponse> {
    return this.request('POST', `/sessions/${sessionId}/cases/${caseId}/initial`, {
      prediction,
    });
  }

  submitFinal(
    sessionId: string,
    caseId: string,
    prediction: Prediction,
  ): Promise<{ advance: true }> {
    return this.request('POST', `/sessions/${sessionId}/cases/${caseId}/final`, {
      prediction,
    });
  }

  metrics(): Promise<MetricsDocument> {
    return this.request('GET', '/metrics');
  }

  reliability(gamma?: number, source?: string): Promise<ReliabilityResponse> {
    const params = new URLSearchParams();
    if (gamma !== undefined) params.set('gamma', String(gamma));
    if (source !== undefined) params.set('source', source);
    const qs = params.toString();
    return this.request('GET', `/metrics/reliability${qs ? `?${qs}` : ''}`);
  }

  arc(rankSource?: string, clfSource?: string): Promise<ArcResponse> {
    const params = new URLSearchParams();
    if (rankSource !== undefined) params.set('rank_source', rankSource);
    if (clfSource !== undefined) params.set('clf_source', clfSource);
    const qs = params.toString();
    return this.request('GET', `/metrics/arc${qs ? `?${qs}` : ''}`);
  }
}
