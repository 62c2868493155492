import type {
  RunSummary, Scene, Trajectory, TrajectoryStep,
} from "../src/types.js";

export function makeRun(overrides: Partial<RunSummary> = {}): RunSummary {
  return {
    run_id: "run-20260801-000000-abc123",
    status: "done",
    env_id: "cartpole",
    n_candidates: 1,
    best_candidate_id: "candidate_0",
    awaiting_candidate_id: null,
    created_at: 1_000,
    ...overrides,
  };
}

export function makeTrajectory(length: number): Trajectory {
  const steps: TrajectoryStep[] = [];
  const scenes: Scene[] = [];
  for (let i = 0; i < length; i++) {
    steps.push({
      observation: { cart_position: 0, pole_angle: 0 },
      action: 1,
      custom_reward: 0.5,
      legacy_reward: 1,
    });
    scenes.push({
      env: "cartpole",
      cart_x: i * 0.01,
      pole_end_x: i * 0.01,
      pole_end_y: 1,
    });
  }
  return {
    seed: 0,
    steps,
    cause: length >= 500 ? "time_limit" : "pole_fell",
    success: length >= 500,
    episode_length: length,
    scenes,
  };
}

export interface FetchCall {
  url: string;
  init?: RequestInit;
}

export function fakeFetch(
  routes: Record<string, { status?: number; body: unknown }>,
): { fetch: typeof fetch; calls: FetchCall[] } {
  const calls: FetchCall[] = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const key = Object.keys(routes).find((k) => url.endsWith(k));
    if (!key) throw new Error(`no fake route for ${url}`);
    const { status = 200, body } = routes[key];
    return {
      ok: status < 400,
      status,
      json: async () => body,
    } as Response;
  }) as typeof fetch;
  return { fetch: impl, calls };
}

// Minimal EventSource stand-in the status subscriber can drive.
export class FakeEventSource {
  static instances: FakeEventSource[] = [];
  listeners: Record<string, Array<(ev: MessageEvent) => void>> = {};
  onopen: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  constructor(public url: string) {
    FakeEventSource.instances.push(this);
  }

  addEventListener(type: string, fn: (ev: MessageEvent) => void): void {
    (this.listeners[type] ??= []).push(fn);
  }

  emit(type: string, data: unknown): void {
    for (const fn of this.listeners[type] ?? []) {
      fn({ data: JSON.stringify(data) } as MessageEvent);
    }
  }

  fail(): void {
    this.onerror?.();
  }

  close(): void {
    this.closed = true;
  }
}
