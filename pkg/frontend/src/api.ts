import type {
  ApiError, RunRecord, RunSummary, StatusEvent, Trajectory, Verdict,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(public readonly error: ApiError) {
    super(`${error.code}: ${error.message}`);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  const body = await resp.json();
  if (!resp.ok) throw new ApiFailure(body as ApiError);
  return body as T;
}

export function listRuns(base = ""): Promise<RunSummary[]> {
  return getJson(`${base}/api/runs`);
}

export function getRun(runId: string, base = ""): Promise<RunRecord> {
  return getJson(`${base}/api/runs/${runId}`);
}

export function getTrajectory(
  runId: string, candidate: number, episode: number, base = "",
): Promise<Trajectory> {
  return getJson(
    `${base}/api/runs/${runId}/candidates/${candidate}/trajectories/${episode}`,
  );
}

export async function postFeedback(
  runId: string, candidate: number, text: string, verdict: Verdict, base = "",
): Promise<void> {
  const resp = await fetch(
    `${base}/api/runs/${runId}/candidates/${candidate}/feedback`,
    {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, verdict }),
    },
  );
  if (!resp.ok) throw new ApiFailure(await resp.json() as ApiError);
}

export interface EventStreamHandle {
  close(): void;
}

// Listen to /api/events, reconnecting with exponential backoff. The
// factory parameter exists so tests can inject a fake EventSource.
export function subscribeStatus(
  onEvent: (ev: StatusEvent) => void,
  onConnectionChange: (up: boolean) => void = () => {},
  base = "",
  factory: (url: string) => EventSource =
    (url) => new EventSource(url),
): EventStreamHandle {
  let source: EventSource | null = null;
  let retryMs = 1000;
  let timer: ReturnType<typeof setTimeout> | null = null;
  let closed = false;

  const connect = () => {
    if (closed) return;
    source = factory(`${base}/api/events`);
    source.addEventListener("status", (msg) => {
      retryMs = 1000;
      onConnectionChange(true);
      onEvent(JSON.parse((msg as MessageEvent).data) as StatusEvent);
    });
    source.onopen = () => onConnectionChange(true);
    source.onerror = () => {
      onConnectionChange(false);
      source?.close();
      timer = setTimeout(connect, retryMs);
      retryMs = Math.min(retryMs * 2, 30_000);
    };
  };
  connect();

  return {
    close() {
      closed = true;
      if (timer !== null) clearTimeout(timer);
      source?.close();
    },
  };
}
