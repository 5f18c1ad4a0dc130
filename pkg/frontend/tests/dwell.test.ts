import { describe, expect, it } from "vitest";

import { DwellTracker } from "../src/dwell.js";
import type { RawAction } from "../src/types.js";

function makeTracker(thresholdMs = 250, graceMs = 100) {
  let t = 0;
  const actions: RawAction[] = [];
  const tracker = new DwellTracker({
    thresholdMs,
    graceMs,
    now: () => t,
    onHover: (a) => actions.push(a),
  });
  return {
    tracker,
    actions,
    tick: (ms: number) => {
      t += ms;
    },
  };
}

describe("DwellTracker", () => {
  it("drops hovers under the threshold", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(100);
    tracker.leave();
    tick(200);
    tracker.flush();
    expect(actions).toEqual([]);
  });

  it("mirrors the server gate at the boundary", () => {
    const outcomes: boolean[] = [];
    for (const dwell of [100, 249, 250, 400]) {
      const { tracker, actions, tick } = makeTracker();
      tracker.enter({ kind: "record-hover", record: "m0" });
      tick(dwell);
      tracker.leave();
      tick(500);
      tracker.flush();
      outcomes.push(actions.length === 1);
    }
    expect(outcomes).toEqual([false, false, true, true]);
  });

  it("emits exactly one action per qualifying dwell", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(400);
    tracker.leave();
    tick(500);
    tracker.flush();
    tracker.flush();
    expect(actions).toHaveLength(1);
    expect(actions[0]).toMatchObject({ kind: "record-hover", record: "m0", dwell_ms: 400 });
    expect(actions[0].action_id).toBeTruthy();
  });

  it("merges pointer jitter into one episode", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(200);
    tracker.leave(); // flicker off the mark...
    tick(50);
    tracker.enter({ kind: "record-hover", record: "m0" }); // ...and back within grace
    tick(250);
    tracker.leave();
    tick(500);
    tracker.flush();
    expect(actions).toHaveLength(1);
    expect(actions[0].dwell_ms).toBe(500);
  });

  it("keeps separate episodes separate", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(300);
    tracker.leave();
    tick(500); // beyond grace
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(300);
    tracker.leave();
    tick(500);
    tracker.flush();
    expect(actions).toHaveLength(2);
    expect(actions.map((a) => a.dwell_ms)).toEqual([300, 300]);
  });

  it("closes an episode on direct hand-off to another mark", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", record: "m0" });
    tick(300);
    tracker.enter({ kind: "record-hover", record: "m1" }); // no leave event fired
    tick(300);
    tracker.leave();
    tick(500);
    tracker.flush();
    expect(actions.map((a) => a.record)).toEqual(["m0", "m1"]);
  });

  it("carries aggregate groups through", () => {
    const { tracker, actions, tick } = makeTracker();
    tracker.enter({ kind: "record-hover", group: ["Genre", "Drama"], aggregate: true });
    tick(400);
    tracker.leave();
    tick(500);
    tracker.flush();
    expect(actions[0]).toMatchObject({ aggregate: true, group: ["Genre", "Drama"] });
  });
});
