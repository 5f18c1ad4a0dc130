// Build VisSpec JSON from shelf state in the service's canonical channel
// order, and derive the scene-level filter/sort descriptions the UI shows.

import { CHANNELS } from "./types.js";
import type { Channel, MarkType, TransformJson, VisSpecJson } from "./types.js";

export interface ShelfBinding {
  field: string;
  aggregate?: "sum" | "mean" | "count";
  reverse?: boolean;
}

export interface ShelfState {
  mark: MarkType;
  encodings: Partial<Record<Channel, ShelfBinding>>;
  transforms: TransformJson[];
}

export function buildSpec(shelves: ShelfState, scope: "records" | "attributes" = "records"): VisSpecJson {
  const encodings: VisSpecJson["encodings"] = {};
  for (const channel of CHANNELS) {
    const binding = shelves.encodings[channel];
    if (!binding) continue;
    encodings[channel] = {
      field: binding.field,
      ...(binding.aggregate ? { aggregate: binding.aggregate } : {}),
      ...(binding.reverse ? { reverse: true } : {}),
    };
  }
  return {
    mark: shelves.mark,
    scope,
    encodings,
    transforms: shelves.transforms,
  };
}

export function describeTransform(transform: TransformJson): string {
  if (transform.kind === "sort") {
    return `sort ${transform.metric} ${transform.direction ?? "desc"}`;
  }
  if (transform.kind === "topn") {
    return `top ${transform.n} by ${transform.metric}`;
  }
  if (transform.values) {
    return `${transform.metric} in {${transform.values.join(", ")}}`;
  }
  const [lo, hi] = transform.range ?? [0, 1];
  return `${transform.metric} in [${lo}, ${hi}]`;
}

/** Replace or append the single filter transform for a metric. */
export function upsertFilter(transforms: TransformJson[], next: TransformJson): TransformJson[] {
  const rest = transforms.filter((t) => !(t.kind === "filter" && t.metric === next.metric));
  return [...rest, next];
}

/** Replace the sort transform (one active sort at a time). */
export function setSort(transforms: TransformJson[], metric: string, direction: "asc" | "desc"): TransformJson[] {
  const rest = transforms.filter((t) => t.kind !== "sort");
  return [...rest, { kind: "sort", metric, direction }];
}
