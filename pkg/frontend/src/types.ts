// Wire types mirroring the provenance service API.

export type Scope = "attributes" | "records";
export type Metric = "frequency" | "recency";
export type SessionMode = "edit" | "view" | "hybrid";
export type MarkType = "point" | "bar" | "line" | "area" | "text";

export const PROVENANCE_FIELDS: Metric[] = ["frequency", "recency"];

export const CHANNELS = [
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
  "shape",
  "tooltip",
  "text",
  "annotation",
] as const;
export type Channel = (typeof CHANNELS)[number];

export interface StrategyJson {
  frequency_mode: string;
  recency_mode: string;
}

export interface AttributeInfo {
  name: string;
  kind: "numerical" | "categorical";
  description: string | null;
}

export interface DatasetSummary {
  attributes: AttributeInfo[];
  record_count: number;
  hash: string;
}

export interface ApiSession {
  session_id: string;
  mode: SessionMode;
  strategy: StrategyJson;
  dwell_threshold_ms: number;
  dataset: DatasetSummary | null;
  seq: number;
}

export interface ScoreCell {
  frequency: number;
  recency: number;
  rank_frequency: number | null;
  rank_recency: number | null;
}

export interface ScoreTable {
  scope: Scope;
  rows: Record<string, ScoreCell>;
  seq: number;
}

export interface StreamMessage {
  seq: number;
  scope: Scope;
  changed_entities: string[];
  scores: Record<string, { frequency: number; recency: number }>;
}

export interface RawAction {
  kind:
    | "attribute-inspect"
    | "encode-assign"
    | "filter-apply"
    | "sort-apply"
    | "record-hover"
    | "table-row-hover";
  attribute?: string;
  record?: string;
  records?: string[];
  group?: [string, string | number | null];
  dwell_ms?: number;
  timestamp_ms?: number;
  action_id?: string;
  aggregate?: boolean;
}

export interface EventsResult {
  accepted: number;
  discarded: number;
  duplicates: number;
  seq: number;
}

export interface EncodingJson {
  field: string;
  kind?: string;
  aggregate?: "sum" | "mean" | "count";
  reverse?: boolean;
}

export interface TransformJson {
  kind: "sort" | "filter" | "topn";
  metric: string;
  direction?: "asc" | "desc";
  range?: [number, number];
  values?: string[];
  n?: number;
}

export interface VisSpecJson {
  spec_version?: number;
  mark: MarkType;
  scope: Scope;
  encodings: Partial<Record<Channel, EncodingJson>>;
  transforms: TransformJson[];
}

export type BoundRow = Record<string, string | number | null>;

export interface BoundSpec {
  spec: VisSpecJson;
  rows: BoundRow[];
  seq: number;
}

export interface AttributeProfile {
  attribute: string;
  kind: "numerical" | "categorical";
  null_pct: number;
  quartiles?: number[];
  bin_pcts?: number[];
  categories?: Record<string, number>;
  seq: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
