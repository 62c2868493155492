// Integration-style test: boot the whole console in jsdom against a
// faked API and walk the feedback loop (list -> run -> playback ->
// submit), standing in for a browser end-to-end run.
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { FakeEventSource, fakeFetch, makeRun, makeTrajectory } from "./helpers.js";

const AWAITING_RUN = {
  run_id: "run-await",
  status: "awaiting_feedback",
  baseline: { success_rate: 0.55 },
  best_candidate_id: "candidate_0",
  awaiting_candidate_id: "candidate_0",
  candidates: [{
    id: "candidate_0",
    generation: 0,
    parent_id: null,
    source: "return 1.0 - abs(pole_angle);",
    repair_attempts: 1,
    success_rate: 0.4,
    metrics: { success_rate: 0.4 },
    verdict: "rejected",
  }],
};

function routes(extra: Record<string, { status?: number; body: unknown }> = {}) {
  return {
    "/api/runs": {
      body: [
        makeRun({ run_id: "run-done", status: "done", created_at: 5 }),
        makeRun({
          run_id: "run-await",
          status: "awaiting_feedback",
          awaiting_candidate_id: "candidate_0",
          created_at: 1,
        }),
      ],
    },
    "/api/runs/run-await": { body: AWAITING_RUN },
    "/api/runs/run-await/candidates/0/trajectories/0": {
      body: makeTrajectory(60),
    },
    "/api/runs/run-await/candidates/0/feedback": {
      body: { ok: true, event: { source: "human" } },
    },
    ...extra,
  };
}

async function boot(fetchImpl: typeof fetch) {
  document.body.innerHTML =
    '<div id="banner"></div><div id="app"></div>';
  window.location.hash = "";
  FakeEventSource.instances = [];
  vi.stubGlobal("fetch", fetchImpl);
  vi.stubGlobal("EventSource", FakeEventSource);
  vi.resetModules();
  await import("../src/main.js");
  await vi.waitFor(() => {
    if (!document.querySelector(".run-row, .empty")) throw new Error("no list");
  });
}

describe("console", () => {
  beforeEach(() => vi.useRealTimers());
  afterEach(() => {
    vi.unstubAllGlobals();
    document.body.innerHTML = "";
  });

  it("lists awaiting runs first with a distinct badge", async () => {
    const { fetch } = fakeFetch(routes());
    await boot(fetch);
    const rows = [...document.querySelectorAll(".run-row")];
    expect(rows).toHaveLength(2);
    expect((rows[0] as HTMLElement).dataset.runId).toBe("run-await");
    expect(rows[0].querySelector(".badge")!.className)
      .toContain("badge-awaiting");
    expect(rows[1].querySelector(".badge")!.className)
      .toContain("badge-done");
  });

  it("shows an empty-state message with no runs", async () => {
    const { fetch } = fakeFetch({ "/api/runs": { body: [] } });
    await boot(fetch);
    expect(document.querySelector(".empty")!.textContent)
      .toMatch(/no runs/i);
  });

  it("updates a badge from a status event without reload", async () => {
    const { fetch } = fakeFetch(routes());
    await boot(fetch);
    FakeEventSource.instances[0].emit("status", {
      run_id: "run-done",
      status: "running",
      awaiting_candidate_id: null,
    });
    await vi.waitFor(() => {
      const row = document.querySelector('[data-run-id="run-done"]');
      if (!row?.querySelector(".badge-running")) throw new Error("not yet");
    });
  });

  it("plays a trajectory with one frame per step", async () => {
    const { fetch } = fakeFetch(routes());
    await boot(fetch);
    window.location.hash = "#/run/run-await";
    window.dispatchEvent(new Event("hashchange"));
    await vi.waitFor(() => {
      if (!document.querySelector(".candidate-row")) throw new Error("no run");
    });
    (document.querySelector(".candidate-row button") as HTMLButtonElement)
      .click();
    await vi.waitFor(() => {
      if (!document.querySelector("#player input[type=range]")) {
        throw new Error("no player");
      }
    });
    const scrub = document.querySelector(
      "#player input[type=range]") as HTMLInputElement;
    expect(Number(scrub.max)).toBe(59); // 60 frames, 0-indexed
    scrub.value = "41";
    scrub.dispatchEvent(new Event("input"));
    const overlay = document.querySelector(".overlay")!;
    expect(overlay.textContent).toContain("step 42/60");
    expect(overlay.textContent).toContain("legacy 42");
  });

  it("submits revise feedback and refreshes the run", async () => {
    const { fetch, calls } = fakeFetch(routes());
    await boot(fetch);
    window.location.hash = "#/run/run-await";
    window.dispatchEvent(new Event("hashchange"));
    await vi.waitFor(() => {
      if (!document.querySelector(".feedback-form")) throw new Error("no form");
    });
    const submit = document.querySelector(
      ".feedback-form .submit") as HTMLButtonElement;
    expect(submit.disabled).toBe(true); // revise with empty text is blocked
    const text = document.querySelector(
      ".feedback-form textarea") as HTMLTextAreaElement;
    text.value = "penalize angular velocity";
    text.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(false);
    submit.click();
    await vi.waitFor(() => {
      if (!calls.some((c) => c.url.endsWith("/candidates/0/feedback"))) {
        throw new Error("no POST yet");
      }
    });
    const post = calls.find((c) => c.url.endsWith("/candidates/0/feedback"))!;
    expect(JSON.parse(String(post.init?.body))).toEqual({
      text: "penalize angular velocity",
      verdict: "revise",
    });
  });
});
