import { describe, expect, it } from "vitest";

import { applyStatusEvent, badgeClass, sortRuns } from "../src/runs.js";
import { makeRun } from "./helpers.js";

describe("sortRuns", () => {
  it("puts awaiting_feedback runs first", () => {
    const runs = [
      makeRun({ run_id: "a", status: "done", created_at: 30 }),
      makeRun({ run_id: "b", status: "awaiting_feedback", created_at: 10 }),
      makeRun({ run_id: "c", status: "running", created_at: 20 }),
    ];
    expect(sortRuns(runs).map((r) => r.run_id)).toEqual(["b", "a", "c"]);
  });

  it("sorts by recency within a status group", () => {
    const runs = [
      makeRun({ run_id: "old", created_at: 1 }),
      makeRun({ run_id: "new", created_at: 2 }),
    ];
    expect(sortRuns(runs).map((r) => r.run_id)).toEqual(["new", "old"]);
  });

  it("does not mutate its input", () => {
    const runs = [
      makeRun({ run_id: "a", status: "done" }),
      makeRun({ run_id: "b", status: "awaiting_feedback" }),
    ];
    sortRuns(runs);
    expect(runs[0].run_id).toBe("a");
  });
});

describe("applyStatusEvent", () => {
  it("updates the matching run and resorts", () => {
    const runs = sortRuns([
      makeRun({ run_id: "a", status: "running", created_at: 2 }),
      makeRun({ run_id: "b", status: "running", created_at: 1 }),
    ]);
    const next = applyStatusEvent(runs, {
      run_id: "b",
      status: "awaiting_feedback",
      awaiting_candidate_id: "candidate_0",
    });
    expect(next[0].run_id).toBe("b");
    expect(next[0].awaiting_candidate_id).toBe("candidate_0");
    expect(next[1].status).toBe("running");
  });

  it("leaves unknown run ids untouched", () => {
    const runs = [makeRun({ run_id: "a" })];
    const next = applyStatusEvent(runs, {
      run_id: "ghost",
      status: "done",
      awaiting_candidate_id: null,
    });
    expect(next).toEqual(runs);
  });
});

describe("badgeClass", () => {
  it("maps every status to a distinct badge", () => {
    const classes = new Set([
      badgeClass("running"), badgeClass("awaiting_feedback"),
      badgeClass("done"), badgeClass("failed"),
    ]);
    expect(classes.size).toBe(4);
  });
});
