// Client-side session state. Everything in here derives from server
// responses and stream messages — the client never invents a score, so a
// hard refresh rebuilds the identical view from GETs alone.

import { ApiClient } from "./api.js";
import type { StreamSubscribe, StreamHandle } from "./api.js";
import { streamUrl } from "./api.js";
import type {
  ApiSession,
  BoundSpec,
  Metric,
  RawAction,
  ScoreTable,
  Scope,
  StreamMessage,
  VisSpecJson,
} from "./types.js";

export type StoreListener = () => void;

export class SessionStore {
  session: ApiSession | null = null;
  scores: { attributes: ScoreTable | null; records: ScoreTable | null } = {
    attributes: null,
    records: null,
  };
  bound: BoundSpec | null = null;
  /** Record ids the data table is narrowed to after an aggregate-mark hover. */
  tableFocus: string[] | null = null;
  lastStreamSeq = 0;

  private listeners: StoreListener[] = [];

  subscribe(listener: StoreListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  notify(): void {
    for (const listener of this.listeners) listener();
  }

  setSession(session: ApiSession): void {
    this.session = session;
    this.notify();
  }

  setScores(table: ScoreTable): void {
    this.scores[table.scope] = table;
    this.notify();
  }

  setBound(bound: BoundSpec | null): void {
    this.bound = bound;
    this.notify();
  }

  setTableFocus(ids: string[] | null): void {
    this.tableFocus = ids;
    this.notify();
  }

  /** Patch score cells from one stream message; one call = one stream cycle. */
  applyStream(message: StreamMessage): void {
    this.lastStreamSeq = message.seq;
    if (this.session) this.session.seq = Math.max(this.session.seq, message.seq);
    const table = this.scores[message.scope];
    if (table) {
      for (const [entity, delta] of Object.entries(message.scores)) {
        const row = table.rows[entity];
        if (row) {
          row.frequency = delta.frequency;
          row.recency = delta.recency;
        }
      }
      table.seq = message.seq;
    }
    // Glyphs bound in the current visualization update in place too, so the
    // canvas repaints without a server round trip.
    if (this.bound) {
      const key = message.scope === "records" ? "id" : "attribute";
      for (const row of this.bound.rows) {
        const delta = message.scores[String(row[key])];
        if (delta && "frequency" in row) {
          row.frequency = delta.frequency;
          row.recency = delta.recency;
        }
      }
    }
    this.notify();
  }

  glyph(scope: Scope, entity: string): { frequency: number; recency: number } {
    const row = this.scores[scope]?.rows[entity];
    return row ? { frequency: row.frequency, recency: row.recency } : { frequency: 0, recency: 0 };
  }

  score(scope: Scope, entity: string, metric: Metric): number {
    return this.glyph(scope, entity)[metric];
  }
}

export interface ControllerOptions {
  /** Queue flush interval; actions batch up between flushes. */
  batchMs?: number;
  now?: () => number;
  subscribeStream?: StreamSubscribe;
}

/**
 * Drives a session against the service: captures actions (batched), keeps
 * the store in sync with responses and the live stream, and enforces the
 * mode contract client-side (view mode never posts events).
 */
export class SessionController {
  readonly store = new SessionStore();
  private queue: RawAction[] = [];
  private stream: StreamHandle | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private nextActionSerial = 1;

  constructor(
    private api: ApiClient,
    private options: ControllerOptions = {},
  ) {}

  get session(): ApiSession | null {
    return this.store.session;
  }

  get mode(): ApiSession["mode"] {
    return this.store.session?.mode ?? "edit";
  }

  get tracking(): boolean {
    return this.mode !== "view";
  }

  async createSession(mode: ApiSession["mode"]): Promise<void> {
    this.store.setSession(await this.api.createSession(mode));
  }

  async uploadDataset(content: string, filename: string, schema?: string): Promise<void> {
    const sid = this.requireSession();
    await this.api.uploadDataset(sid, content, filename, schema);
    this.store.setSession(await this.api.getSession(sid));
    await this.refreshScores();
  }

  async importLog(log: string, mode: "view" | "hybrid", overrideHash = false): Promise<void> {
    const sid = this.requireSession();
    this.store.setSession(await this.api.importLog(sid, log, mode, overrideHash));
    await this.refreshScores();
  }

  async refreshScores(strategy?: string): Promise<void> {
    const sid = this.requireSession();
    this.store.setScores(await this.api.getScores(sid, "attributes", strategy));
    this.store.setScores(await this.api.getScores(sid, "records", strategy));
  }

  async bindSpec(spec: VisSpecJson): Promise<BoundSpec> {
    const sid = this.requireSession();
    const bound = await this.api.bindSpec(sid, spec);
    this.store.setBound(bound);
    return bound;
  }

  async exportLog(): Promise<string> {
    return this.api.exportLog(this.requireSession());
  }

  /**
   * Capture one raw action. In view mode this is a no-op: imported
   * provenance stays frozen and nothing is posted.
   */
  capture(action: RawAction): void {
    if (!this.tracking) return;
    if (!action.action_id) {
      action = { ...action, action_id: `ui-${this.nextActionSerial++}` };
    }
    this.queue.push(action);
  }

  captureEncodeAssign(field: string): void {
    this.capture({ kind: "encode-assign", attribute: field });
  }

  captureInspect(attribute: string): void {
    this.capture({ kind: "attribute-inspect", attribute });
  }

  captureFilterCommit(attribute: string): void {
    this.capture({ kind: "filter-apply", attribute });
  }

  captureSortCommit(attribute: string): void {
    this.capture({ kind: "sort-apply", attribute });
  }

  pendingCount(): number {
    return this.queue.length;
  }

  /** Send the queued batch, if any. Returns the number of actions sent. */
  async flush(): Promise<number> {
    if (this.queue.length === 0 || !this.store.session) return 0;
    const batch = this.queue;
    this.queue = [];
    await this.api.postActions(this.store.session.session_id, batch);
    return batch.length;
  }

  startBatching(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      void this.flush();
    }, this.options.batchMs ?? 300);
  }

  stopBatching(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** Subscribe to live score deltas; messages patch the store directly. */
  openStream(baseUrl: string): void {
    const sid = this.requireSession();
    const subscribe = this.options.subscribeStream;
    if (!subscribe) return;
    this.closeStream();
    this.stream = subscribe(streamUrl(baseUrl, sid, this.store.session?.seq ?? 0), (message) => {
      this.store.applyStream(message);
    });
  }

  closeStream(): void {
    this.stream?.close();
    this.stream = null;
  }

  private requireSession(): string {
    const session = this.store.session;
    if (!session) throw new Error("no session");
    return session.session_id;
  }
}
