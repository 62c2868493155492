import type { RunStatus, RunSummary, StatusEvent } from "./types.js";

// awaiting_feedback runs first, then by recency within each group
export function sortRuns(runs: RunSummary[]): RunSummary[] {
  return [...runs].sort((a, b) => {
    const aw = Number(b.status === "awaiting_feedback")
      - Number(a.status === "awaiting_feedback");
    if (aw !== 0) return aw;
    return b.created_at - a.created_at;
  });
}

export function applyStatusEvent(
  runs: RunSummary[], ev: StatusEvent,
): RunSummary[] {
  return sortRuns(runs.map((r) =>
    r.run_id === ev.run_id
      ? { ...r, status: ev.status, awaiting_candidate_id: ev.awaiting_candidate_id }
      : r,
  ));
}

const BADGES: Record<RunStatus, string> = {
  awaiting_feedback: "badge-awaiting",
  running: "badge-running",
  done: "badge-done",
  failed: "badge-failed",
};

export function badgeClass(status: RunStatus): string {
  return BADGES[status] ?? "badge-running";
}
