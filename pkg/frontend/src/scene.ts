// Grammar-of-graphics scene builder: (spec, bound rows) -> abstract marks
// with every visual channel resolved to a normalized [0, 1] position.
// Provenance fields keep their fixed [0, 1] domain; data fields normalize to
// the observed extent; categorical fields get band positions. A reversed
// binding maps v to 1 - v. The DOM painter only translates these numbers to
// pixels and colors, so everything visual is testable here.

import { PROVENANCE_FIELDS } from "./types.js";
import type { BoundRow, Channel, EncodingJson, VisSpecJson } from "./types.js";

export interface SceneMark {
  /** Entity id (record id / attribute name) or group label for aggregates. */
  entity: string;
  x: number | null;
  y: number | null;
  size: number | null;
  fill: number | null;
  fillOpacity: number | null;
  stroke: number | null;
  strokeOpacity: number | null;
  strokeWidth: number | null;
  shape: string | null;
  column: number | null;
  row: number | null;
  text: string | null;
  annotation: string | null;
  tooltip: Record<string, string> | null;
}

export interface Scene {
  mark: VisSpecJson["mark"];
  marks: SceneMark[];
}

const SCALED: Channel[] = [
  "x",
  "y",
  "column",
  "row",
  "fill",
  "fillOpacity",
  "stroke",
  "strokeOpacity",
  "strokeWidth",
  "size",
];

function isProvenance(field: string): boolean {
  return (PROVENANCE_FIELDS as string[]).includes(field);
}

function numericValues(rows: BoundRow[], field: string): number[] {
  return rows
    .map((r) => r[field])
    .filter((v): v is number => typeof v === "number" && Number.isFinite(v));
}

interface ChannelScale {
  (row: BoundRow): number | null;
}

function makeScale(encoding: EncodingJson, rows: BoundRow[]): ChannelScale {
  const { field } = encoding;
  const values = rows.map((r) => r[field]);
  const numeric = values.every((v) => v === null || typeof v === "number");

  if (numeric) {
    let lo = 0;
    let hi = 1;
    if (!isProvenance(field)) {
      const nums = numericValues(rows, field);
      lo = Math.min(...nums);
      hi = Math.max(...nums);
    }
    const span = hi - lo;
    return (row) => {
      const v = row[field];
      if (typeof v !== "number") return null;
      const t = span === 0 ? 1 : (v - lo) / span;
      return encoding.reverse ? 1 - t : t;
    };
  }

  // Categorical: band positions in first-appearance order.
  const seen: string[] = [];
  for (const v of values) {
    if (v !== null && !seen.includes(String(v))) seen.push(String(v));
  }
  const bands = seen.length;
  return (row) => {
    const v = row[field];
    if (v === null || v === undefined) return null;
    const index = seen.indexOf(String(v));
    const t = bands <= 1 ? 0.5 : (index + 0.5) / bands;
    return encoding.reverse ? 1 - t : t;
  };
}

function formatValue(v: string | number | null): string {
  if (v === null || v === undefined) return "";
  if (typeof v === "number") {
    return Number.isInteger(v) ? String(v) : v.toFixed(2);
  }
  return String(v);
}

export function entityKeyOf(spec: VisSpecJson, rows: BoundRow[]): string {
  if (spec.scope === "attributes") return "attribute";
  if (rows.length > 0 && !("id" in rows[0])) {
    // Aggregated rows are keyed by the grouping field.
    const agg = Object.entries(spec.encodings).find(([, e]) => e?.aggregate);
    const aggField = agg?.[1]?.field;
    const key = Object.keys(rows[0]).find((k) => k !== aggField);
    if (key) return key;
  }
  return "id";
}

export function buildScene(spec: VisSpecJson, rows: BoundRow[]): Scene {
  const entityKey = entityKeyOf(spec, rows);
  const scales = new Map<Channel, ChannelScale>();
  for (const channel of SCALED) {
    const encoding = spec.encodings[channel];
    if (encoding) scales.set(channel, makeScale(encoding, rows));
  }

  const marks: SceneMark[] = rows.map((row) => {
    const mark: SceneMark = {
      entity: formatValue(row[entityKey] ?? ""),
      x: null,
      y: null,
      size: null,
      fill: null,
      fillOpacity: null,
      stroke: null,
      strokeOpacity: null,
      strokeWidth: null,
      shape: null,
      column: null,
      row: null,
      text: null,
      annotation: null,
      tooltip: null,
    };
    for (const [channel, scale] of scales) {
      const value = scale(row);
      (mark as unknown as Record<string, number | null>)[channel] = value;
    }
    const shapeEnc = spec.encodings.shape;
    if (shapeEnc) mark.shape = formatValue(row[shapeEnc.field]);
    const textEnc = spec.encodings.text;
    if (textEnc) mark.text = formatValue(row[textEnc.field]);
    const annotationEnc = spec.encodings.annotation;
    if (annotationEnc) mark.annotation = formatValue(row[annotationEnc.field]);
    const tooltipEnc = spec.encodings.tooltip;
    if (tooltipEnc) {
      mark.tooltip = { [tooltipEnc.field]: formatValue(row[tooltipEnc.field]) };
    }
    return mark;
  });

  return { mark: spec.mark, marks };
}

/** True when at least one mark carries a nonzero resolved glyph value. */
export function sceneHasInk(scene: Scene): boolean {
  return scene.marks.some((m) =>
    [m.x, m.y, m.size, m.fill, m.fillOpacity, m.stroke, m.strokeOpacity, m.strokeWidth].some(
      (v) => v !== null && v > 0,
    ),
  );
}
