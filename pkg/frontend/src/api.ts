import type {
  AlphaSpec,
  CreateSessionRequest,
  CreateSessionResponse,
  SessionState,
  TraceRecord,
} from './types.js';

export class ApiError extends Error {
  /** HTTP status, or 0 when the request never reached the server */
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = 'ApiError';
  }
}

/** The subset of the service the UI talks to; one method per endpoint. */
export interface SessionApi {
  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse>;
  getState(id: string): Promise<SessionState>;
  step(id: string, n: number): Promise<SessionState>;
  movePoint(id: string, index: number, row: number, col: number): Promise<SessionState>;
  setAlpha(id: string, alpha: AlphaSpec): Promise<SessionState>;
  getTrace(id: string): Promise<{ trace: TraceRecord[] }>;
  deleteSession(id: string): Promise<void>;
}

export class HttpSessionApi implements SessionApi {
  constructor(private readonly base: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.base + path, {
        method,
        headers: body === undefined ? undefined : { 'content-type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!res.ok) {
      let detail = `${res.status} ${res.statusText}`;
      try {
        const data = (await res.json()) as { detail?: unknown };
        if (data && data.detail !== undefined) {
          detail = typeof data.detail === 'string' ? data.detail : JSON.stringify(data.detail);
        }
      } catch {
        // keep the status line
      }
      throw new ApiError(res.status, detail);
    }
    if (res.status === 204) {
      return undefined as T;
    }
    return (await res.json()) as T;
  }

  createSession(req: CreateSessionRequest): Promise<CreateSessionResponse> {
    return this.request('POST', '/sessions', req);
  }

  getState(id: string): Promise<SessionState> {
    return this.request('GET', `/sessions/${id}`);
  }

  step(id: string, n: number): Promise<SessionState> {
    return this.request('POST', `/sessions/${id}/step`, { n });
  }

  movePoint(id: string, index: number, row: number, col: number): Promise<SessionState> {
    return this.request('PATCH', `/sessions/${id}/points`, { index, row, col });
  }

  setAlpha(id: string, alpha: AlphaSpec): Promise<SessionState> {
    return this.request('POST', `/sessions/${id}/alpha`, alpha);
  }

  getTrace(id: string): Promise<{ trace: TraceRecord[] }> {
    return this.request('GET', `/sessions/${id}/trace`);
  }

  deleteSession(id: string): Promise<void> {
    return this.request('DELETE', `/sessions/${id}`);
  }
}
