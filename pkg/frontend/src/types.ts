// Wire types mirroring the rewardforge HTTP API. The console never
// recomputes physics or rewards; everything here is served data.

export type RunStatus = "running" | "awaiting_feedback" | "done" | "failed";

export interface RunSummary {
  run_id: string;
  status: RunStatus;
  env_id: string;
  n_candidates: number;
  best_candidate_id: string | null;
  awaiting_candidate_id: string | null;
  created_at: number;
}

export interface CandidateRecord {
  id: string;
  generation: number;
  parent_id: string | null;
  source: string | null;
  repair_attempts: number;
  success_rate: number | null;
  metrics: Record<string, number> | null;
  verdict: "accepted" | "rejected" | "failed";
}

export interface RunRecord {
  run_id: string;
  status: RunStatus;
  baseline: { success_rate: number } | null;
  candidates: CandidateRecord[];
  best_candidate_id: string | null;
  awaiting_candidate_id: string | null;
}

export interface TrajectoryStep {
  observation: Record<string, number>;
  action: number;
  custom_reward: number;
  legacy_reward: number;
}

// Scene geometry precomputed server-side by render_state.
export interface CartpoleScene {
  env: "cartpole";
  cart_x: number;
  pole_end_x: number;
  pole_end_y: number;
}

export interface MountaincarScene {
  env: "mountaincar";
  car_x: number;
  car_y: number;
}

export type Scene = CartpoleScene | MountaincarScene;

export interface Trajectory {
  seed: number;
  steps: TrajectoryStep[];
  cause: string;
  success: boolean;
  episode_length: number;
  scenes: Scene[];
}

export type Verdict = "revise" | "accept" | "reject";

export interface StatusEvent {
  run_id: string;
  status: RunStatus;
  awaiting_candidate_id: string | null;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
}
