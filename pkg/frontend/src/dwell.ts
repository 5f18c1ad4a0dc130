// Hover dwell measurement. One action per continuous hover episode: the
// episode starts on enter, survives sub-grace flickers across mark borders
// (pointer jitter), and is measured when the pointer settles elsewhere.
// Dwells under the client threshold are dropped locally to spare traffic;
// the server re-checks its own threshold regardless.

import type { RawAction } from "./types.js";

export interface HoverTarget {
  kind: "record-hover" | "table-row-hover";
  record?: string;
  records?: string[];
  group?: [string, string | number | null];
  aggregate?: boolean;
}

interface Episode {
  key: string;
  target: HoverTarget;
  enteredAt: number;
  leftAt: number | null;
}

function targetKey(target: HoverTarget): string {
  if (target.record !== undefined) return `${target.kind}:${target.record}`;
  if (target.group !== undefined) return `${target.kind}:g:${target.group[0]}=${target.group[1]}`;
  return `${target.kind}:${(target.records ?? []).join(",")}`;
}

export class DwellTracker {
  private episode: Episode | null = null;
  private nextActionId = 1;

  constructor(
    private options: {
      thresholdMs: number;
      onHover: (action: RawAction) => void;
      graceMs?: number;
      now?: () => number;
      actionIdPrefix?: string;
    },
  ) {}

  private now(): number {
    return this.options.now ? this.options.now() : Date.now();
  }

  private grace(): number {
    return this.options.graceMs ?? 100;
  }

  private emit(episode: Episode): void {
    const dwell = (episode.leftAt as number) - episode.enteredAt;
    if (dwell < this.options.thresholdMs) return;
    const prefix = this.options.actionIdPrefix ?? "hover";
    this.options.onHover({
      kind: episode.target.kind,
      record: episode.target.record,
      records: episode.target.records,
      group: episode.target.group,
      aggregate: episode.target.aggregate,
      dwell_ms: dwell,
      timestamp_ms: episode.leftAt as number,
      action_id: `${prefix}-${this.nextActionId++}`,
    });
  }

  enter(target: HoverTarget): void {
    const t = this.now();
    const key = targetKey(target);
    if (this.episode && this.episode.leftAt !== null) {
      if (this.episode.key === key && t - this.episode.leftAt < this.grace()) {
        this.episode.leftAt = null; // jitter: resume the same episode
        return;
      }
      this.emit(this.episode); // a different (or lapsed) episode ends here
      this.episode = null;
    } else if (this.episode) {
      // Direct hand-off between marks without a leave event.
      this.episode.leftAt = t;
      this.emit(this.episode);
      this.episode = null;
    }
    this.episode = { key, target, enteredAt: t, leftAt: null };
  }

  leave(): void {
    if (this.episode && this.episode.leftAt === null) {
      this.episode.leftAt = this.now();
    }
  }

  /** Emit any lapsed episode; call periodically or before batch sends. */
  flush(): void {
    if (this.episode && this.episode.leftAt !== null && this.now() - this.episode.leftAt >= this.grace()) {
      this.emit(this.episode);
      this.episode = null;
    }
  }
}
