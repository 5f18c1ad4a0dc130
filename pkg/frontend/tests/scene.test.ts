import { describe, expect, it } from "vitest";

import { buildScene, entityKeyOf, sceneHasInk } from "../src/scene.js";
import type { BoundRow, VisSpecJson } from "../src/types.js";

const rows: BoundRow[] = [
  { id: "m0", Genre: "Action", "IMDB Rating": 6.0, frequency: 0.2, recency: 0.5 },
  { id: "m1", Genre: "Drama", "IMDB Rating": 8.0, frequency: 0.4, recency: 1.0 },
  { id: "m2", Genre: "Comedy", "IMDB Rating": 7.0, frequency: 0.0, recency: 0.0 },
];

function spec(encodings: VisSpecJson["encodings"], mark: VisSpecJson["mark"] = "point"): VisSpecJson {
  return { mark, scope: "records", encodings, transforms: [] };
}

describe("buildScene", () => {
  it("keeps the provenance domain fixed at [0, 1]", () => {
    const scene = buildScene(spec({ x: { field: "frequency" } }), rows);
    // Not renormalized to the observed 0.4 max: 0.2 stays 0.2.
    expect(scene.marks.map((m) => m.x)).toEqual([0.2, 0.4, 0.0]);
  });

  it("reverses scales as 1 - v", () => {
    const scene = buildScene(spec({ x: { field: "frequency", reverse: true } }), rows);
    expect(scene.marks.map((m) => m.x)).toEqual([0.8, 0.6, 1.0]);
  });

  it("reversal flips positions but never the underlying values", () => {
    const forward = buildScene(spec({ size: { field: "recency" } }), rows);
    const reversed = buildScene(spec({ size: { field: "recency", reverse: true } }), rows);
    const maxForward = forward.marks.reduce((a, b) => ((a.size ?? 0) > (b.size ?? 0) ? a : b));
    const minReversed = reversed.marks.reduce((a, b) => ((a.size ?? 1) < (b.size ?? 1) ? a : b));
    expect(maxForward.entity).toBe("m1"); // highest recency
    expect(minReversed.entity).toBe("m1"); // same movie, smallest after reverse
  });

  it("normalizes data fields to their extent", () => {
    const scene = buildScene(spec({ y: { field: "IMDB Rating" } }), rows);
    expect(scene.marks.map((m) => m.y)).toEqual([0.0, 1.0, 0.5]);
  });

  it("gives categorical fields band positions", () => {
    const scene = buildScene(spec({ x: { field: "Genre" } }), rows);
    expect(scene.marks.map((m) => m.x)).toEqual([0.5 / 3, 1.5 / 3, 2.5 / 3]);
  });

  it("renders annotation as an extra label next to the mark", () => {
    const scene = buildScene(
      spec({ x: { field: "frequency" }, annotation: { field: "frequency" } }),
      rows,
    );
    expect(scene.marks[0].annotation).toBe("0.20");
    expect(scene.marks[2].annotation).toBe("0");
  });

  it("carries tooltip fields through", () => {
    const scene = buildScene(spec({ x: { field: "recency" }, tooltip: { field: "Genre" } }), rows);
    expect(scene.marks[1].tooltip).toEqual({ Genre: "Drama" });
  });

  it("maps shape to category labels", () => {
    const scene = buildScene(spec({ x: { field: "recency" }, shape: { field: "Genre" } }), rows);
    expect(scene.marks.map((m) => m.shape)).toEqual(["Action", "Drama", "Comedy"]);
  });

  it("detects ink", () => {
    const blank = buildScene(spec({ size: { field: "frequency" } }), [
      { id: "m9", frequency: 0, recency: 0 },
    ]);
    expect(sceneHasInk(blank)).toBe(false);
    expect(sceneHasInk(buildScene(spec({ size: { field: "frequency" } }), rows))).toBe(true);
  });

  it("keys aggregated rows by the grouping field", () => {
    const aggregated: BoundRow[] = [
      { Genre: "Action", frequency: 0.4 },
      { Genre: "Drama", frequency: 1.0 },
    ];
    const aggSpec = spec({
      x: { field: "Genre" },
      y: { field: "frequency", aggregate: "sum" },
    }, "bar");
    expect(entityKeyOf(aggSpec, aggregated)).toBe("Genre");
    const scene = buildScene(aggSpec, aggregated);
    expect(scene.marks.map((m) => m.entity)).toEqual(["Action", "Drama"]);
    expect(scene.marks.map((m) => m.y)).toEqual([0.4, 1.0]);
  });

  it("uses attribute names as entities for panel scopes", () => {
    const panelRows: BoundRow[] = [
      { attribute: "Title", frequency: 1.0, recency: 0.3 },
      { attribute: "Genre", frequency: 0.5, recency: 1.0 },
    ];
    const panelSpec: VisSpecJson = {
      mark: "bar",
      scope: "attributes",
      encodings: { fill: { field: "frequency" } },
      transforms: [],
    };
    const scene = buildScene(panelSpec, panelRows);
    expect(scene.marks.map((m) => m.entity)).toEqual(["Title", "Genre"]);
    expect(scene.marks.map((m) => m.fill)).toEqual([1.0, 0.5]);
  });
});
