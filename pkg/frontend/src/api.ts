/**
 * Typed client for the analysis service.
 *
 * Every mutation goes through one promise queue so requests reach the
 * server in user order, and each mutation carries the last acknowledged
 * revision. A 409 (someone else moved the session) triggers one refetch
 * of the current revision followed by a replay of the same intent.
 */

import {
  CleanedResponse,
  ComponentsResponse,
  DecomposeResponse,
  SessionInfo,
  SummaryResponse,
  TuneResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(detail);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "error";
  let detail = `${resp.status}`;
  try {
    const body = await resp.json();
    code = body.code ?? code;
    detail = body.detail ?? JSON.stringify(body);
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(resp.status, code, detail);
}

export class ApiClient {
  sessionId: string | null = null;
  revision = 0;
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  /** Serialize a unit of work behind all previously queued mutations. */
  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.queue.then(work, work);
    this.queue = next.catch(() => undefined);
    return next;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async createSession(csv: string, p: number, order: number): Promise<SessionInfo> {
    return this.enqueue(async () => {
      const info = await this.post<SessionInfo>("/sessions", { csv, p, order });
      this.sessionId = info.session_id;
      this.revision = info.revision;
      return info;
    });
  }

  private sid(): string {
    if (!this.sessionId) throw new ApiError(0, "no-session", "no active session");
    return this.sessionId;
  }

  private async refreshRevision(): Promise<void> {
    const info = await this.request<SessionInfo>(`/sessions/${this.sid()}`);
    this.revision = info.revision;
  }

  /** Run a revision-carrying mutation, replaying once after a stale 409. */
  private mutate<T extends { revision: number }>(
    send: (revision: number) => Promise<T>,
  ): Promise<T> {
    return this.enqueue(async () => {
      try {
        const out = await send(this.revision);
        this.revision = out.revision;
        return out;
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          await this.refreshRevision();
          const out = await send(this.revision);
          this.revision = out.revision;
          return out;
        }
        throw err;
      }
    });
  }

  tune(grid?: number[], ell = 0.1): Promise<TuneResponse> {
    return this.mutate((revision) =>
      this.post<TuneResponse>(`/sessions/${this.sid()}/tune`, { grid, ell, revision }),
    );
  }

  decompose(lambda: number, q: number): Promise<DecomposeResponse> {
    return this.mutate((revision) =>
      this.post<DecomposeResponse>(`/sessions/${this.sid()}/decompose`, {
        lambda,
        q,
        revision,
      }),
    );
  }

  setSelection(indices: number[]): Promise<{ revision: number; indices: number[] }> {
    return this.mutate((revision) =>
      this.request(`/sessions/${this.sid()}/selection`, {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ indices, revision }),
      }),
    );
  }

  getComponents(): Promise<ComponentsResponse> {
    return this.request(`/sessions/${this.sid()}/components`);
  }

  getCleaned(channels: number[], raw = false): Promise<CleanedResponse> {
    const qs = new URLSearchParams();
    if (channels.length) qs.set("channels", channels.join(","));
    if (raw) qs.set("raw", "true");
    const suffix = qs.toString() ? `?${qs.toString()}` : "";
    return this.request(`/sessions/${this.sid()}/cleaned${suffix}`);
  }

  getSummary(): Promise<SummaryResponse> {
    return this.request(`/sessions/${this.sid()}/summary`);
  }
}
