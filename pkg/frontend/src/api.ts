// Typed client for the provenance service. The fetch implementation is
// injectable so tests can run against an in-memory fake.

import type {
  ApiSession,
  AttributeProfile,
  BoundSpec,
  EventsResult,
  RawAction,
  ScoreTable,
  Scope,
  SessionMode,
  StrategyJson,
  StreamMessage,
  VisSpecJson,
} from "./types.js";

export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<FetchResponse>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: FetchResponse): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "error";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    public baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init) as Promise<FetchResponse>,
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => unwrap<T>(r));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(this.baseUrl + path).then((r) => unwrap<T>(r));
  }

  createSession(mode: SessionMode, strategy?: StrategyJson, dwellMs?: number): Promise<ApiSession> {
    return this.post("/sessions", {
      mode,
      strategy: strategy ?? null,
      dwell_threshold_ms: dwellMs ?? null,
    });
  }

  getSession(sessionId: string): Promise<ApiSession> {
    return this.get(`/sessions/${sessionId}`);
  }

  async uploadDataset(
    sessionId: string,
    content: string,
    filename: string,
    schema?: string,
  ): Promise<{ dataset: ApiSession["dataset"]; seq: number }> {
    const form = new FormData();
    form.append("file", new Blob([content]), filename);
    if (schema !== undefined) {
      form.append("schema", new Blob([schema]), "schema.json");
    }
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/dataset`, {
      method: "POST",
      body: form,
    });
    return unwrap(response);
  }

  postActions(sessionId: string, actions: RawAction[]): Promise<EventsResult> {
    return this.post(`/sessions/${sessionId}/events`, { actions });
  }

  getScores(sessionId: string, scope: Scope, strategy?: string): Promise<ScoreTable> {
    const extra = strategy ? `&strategy=${encodeURIComponent(strategy)}` : "";
    return this.get(`/sessions/${sessionId}/scores?scope=${scope}${extra}`);
  }

  bindSpec(sessionId: string, spec: VisSpecJson): Promise<BoundSpec> {
    return this.post(`/sessions/${sessionId}/spec`, spec);
  }

  getProfile(sessionId: string, attribute: string): Promise<AttributeProfile> {
    return this.get(`/sessions/${sessionId}/profile/${encodeURIComponent(attribute)}`);
  }

  async exportLog(sessionId: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/export`);
    if (!response.ok) {
      await unwrap(response);
    }
    return response.text();
  }

  importLog(sessionId: string, log: string, mode: "view" | "hybrid", overrideHash = false): Promise<ApiSession> {
    return this.post(`/sessions/${sessionId}/import`, {
      log,
      mode,
      override_hash: overrideHash,
    });
  }
}

// --- stream subscription ----------------------------------------------------

export interface StreamHandle {
  close(): void;
}

export type StreamSubscribe = (
  url: string,
  onMessage: (message: StreamMessage) => void,
) => StreamHandle;

/** Browser implementation backed by EventSource. */
export const eventSourceSubscribe: StreamSubscribe = (url, onMessage) => {
  const source = new EventSource(url);
  source.onmessage = (event) => {
    onMessage(JSON.parse(event.data) as StreamMessage);
  };
  return { close: () => source.close() };
};

export function streamUrl(baseUrl: string, sessionId: string, after = 0): string {
  return `${baseUrl}/sessions/${sessionId}/stream?after=${after}`;
}
