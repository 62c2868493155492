"""Tile-coded epsilon-greedy Q-learning.

Stands in for a deep RL learner at desk scale: linear function
approximation over n_tilings offset grids, semi-gradient Q-learning
with zero bootstrap on termination, and a hard total-step budget so
baseline-vs-candidate comparisons are budget-fair.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dsl import Diagnostic, EvalFault, RewardProgram, evaluate
from .envs import EnvModel, TrajectoryLog


@dataclass(frozen=True)
class LearnerConfig:
    n_tilings: int = 16
    tiles_per_dim: int = 12
    step_size: float = 0.1  # applied as step_size / n_tilings
    discount: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.8  # of training_episodes
    training_episodes: int = 600
    total_step_budget: int | None = None
    eval_episodes: int = 100
    r_max: float = 1000.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must be in (0, 1)")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not 0.0 <= eps <= 1.0:
                raise ValueError("epsilon must be in [0, 1]")
        if self.training_episodes <= 0 or self.eval_episodes <= 0:
            raise ValueError("episode counts must be positive")
        if self.total_step_budget is not None and self.total_step_budget <= 0:
            raise ValueError("total_step_budget must be positive")

    def to_dict(self) -> dict:
        return {
            "n_tilings": self.n_tilings,
            "tiles_per_dim": self.tiles_per_dim,
            "step_size": self.step_size,
            "discount": self.discount,
            "epsilon_start": self.epsilon_start,
            "epsilon_end": self.epsilon_end,
            "epsilon_decay_fraction": self.epsilon_decay_fraction,
            "training_episodes": self.training_episodes,
            "total_step_budget": self.total_step_budget,
            "eval_episodes": self.eval_episodes,
            "r_max": self.r_max,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "LearnerConfig":
        return LearnerConfig(**d)

    def with_seed(self, seed: int) -> "LearnerConfig":
        return replace(self, seed=seed)


def tile_features(obs: dict[str, float], env: EnvModel,
                  config: LearnerConfig) -> list[int]:
    """Indices of the active tile in each of the n_tilings grids."""
    names = env.spec.names
    tiles = config.tiles_per_dim
    n_tilings = config.n_tilings
    dims = len(names)
    tiling_size = tiles ** dims
    indices = []
    norms = []
    for var in env.spec.variables:
        x = obs[var.name]
        x_norm = (x - var.low) / (var.high - var.low)
        norms.append(min(1.0, max(0.0, x_norm)))
    for t in range(n_tilings):
        offset = t / n_tilings
        idx = t * tiling_size
        for d, x_norm in enumerate(norms):
            cell = min(tiles - 1, math.floor(x_norm * tiles + offset))
            idx += cell * tiles ** d
        indices.append(idx)
    return indices


@dataclass
class Policy:
    weights: np.ndarray  # shape (action_count, n_features)

    def q_values(self, feats: list[int]) -> np.ndarray:
        return self.weights[:, feats].sum(axis=1)

    def greedy_action(self, feats: list[int]) -> int:
        return int(np.argmax(self.q_values(feats)))  # ties -> lowest index


@dataclass
class TrainingReport:
    custom_returns: list[float] = field(default_factory=list)
    legacy_returns: list[float] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    successes: list[bool] = field(default_factory=list)
    causes: list[str] = field(default_factory=list)
    clamp_events: int = 0
    fault_count: int = 0
    fault: dict | None = None  # {"diagnostic", "step_index"}
    obs_stats: dict[str, dict[str, float]] = field(default_factory=dict)
    total_steps: int = 0
    wall_time: float = 0.0
    seed: int = 0

    @property
    def episodes(self) -> int:
        return len(self.lengths)

    def to_dict(self) -> dict:
        return {
            "custom_returns": self.custom_returns,
            "legacy_returns": self.legacy_returns,
            "lengths": self.lengths,
            "successes": self.successes,
            "causes": self.causes,
            "clamp_events": self.clamp_events,
            "fault_count": self.fault_count,
            "fault": self.fault,
            "obs_stats": self.obs_stats,
            "total_steps": self.total_steps,
            "wall_time": self.wall_time,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrainingReport":
        return TrainingReport(**d)


class _ObsStats:
    def __init__(self, names: list[str]):
        self.names = names
        self.count = 0
        self.sums = {n: 0.0 for n in names}
        self.mins = {n: math.inf for n in names}
        self.maxs = {n: -math.inf for n in names}

    def add(self, obs: dict[str, float]) -> None:
        self.count += 1
        for n in self.names:
            x = obs[n]
            self.sums[n] += x
            if x < self.mins[n]:
                self.mins[n] = x
            if x > self.maxs[n]:
                self.maxs[n] = x

    def summary(self) -> dict[str, dict[str, float]]:
        if self.count == 0:
            return {}
        return {
            n: {"mean": self.sums[n] / self.count,
                "min": self.mins[n], "max": self.maxs[n]}
            for n in self.names
        }


def _epsilon(config: LearnerConfig, episode: int) -> float:
    horizon = max(1, int(config.training_episodes * config.epsilon_decay_fraction))
    if episode >= horizon:
        return config.epsilon_end
    frac = episode / horizon
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)


def train(env: EnvModel, reward: RewardProgram | None,
          config: LearnerConfig) -> tuple[Policy, TrainingReport]:
    """Train against a DSL reward (or the legacy reward when reward is None).

    Deterministic given (config.seed, env, reward). A runtime reward
    fault aborts training; the fault is recorded in the report rather
    than raised.
    """
    t0 = time.monotonic()
    dims = len(env.spec.names)
    n_features = config.n_tilings * config.tiles_per_dim ** dims
    weights = np.zeros((env.action_count, n_features))
    policy = Policy(weights)
    alpha = config.step_size / config.n_tilings
    gamma = config.discount
    rng = random.Random(config.seed)
    report = TrainingReport(seed=config.seed)
    stats = _ObsStats(env.spec.names)

    for episode in range(config.training_episodes):
        if (config.total_step_budget is not None
                and report.total_steps >= config.total_step_budget):
            break
        eps = _epsilon(config, episode)
        obs = env.reset(seed=config.seed + episode)
        feats = tile_features(obs, env, config)
        custom_return = 0.0
        legacy_return = 0.0
        length = 0
        cause = "none"
        aborted = False
        while True:
            if (config.total_step_budget is not None
                    and report.total_steps >= config.total_step_budget):
                aborted = True  # budget is a hard cap, cut mid-episode
                break
            if rng.random() < eps:
                action = rng.randrange(env.action_count)
            else:
                action = policy.greedy_action(feats)
            result = env.step(action)
            length += 1
            report.total_steps += 1
            stats.add(result.observation)
            done = result.terminated or result.truncated
            success_now = done and env.is_success_cause(result.cause, length)
            failure_now = result.terminated and env.is_failure_cause(result.cause)
            if reward is None:
                r = result.legacy_reward
            else:
                try:
                    out = evaluate(reward, result.observation,
                                   success_now, failure_now, r_max=config.r_max)
                except EvalFault as fault:
                    report.fault_count += 1
                    report.fault = {
                        "diagnostic": fault.diagnostic.to_dict(),
                        "step_index": report.total_steps - 1,
                    }
                    report.wall_time = time.monotonic() - t0
                    report.obs_stats = stats.summary()
                    return policy, report
                r = out.reward
                if out.clamped:
                    report.clamp_events += 1
            custom_return += r
            legacy_return += result.legacy_reward
            next_feats = tile_features(result.observation, env, config)
            q_sa = weights[action, feats].sum()
            target = r if result.terminated else r + gamma * policy.q_values(next_feats).max()
            weights[action, feats] += alpha * (target - q_sa)
            feats = next_feats
            if done:
                cause = result.cause
                break
        if aborted:
            break
        report.custom_returns.append(custom_return)
        report.legacy_returns.append(legacy_return)
        report.lengths.append(length)
        report.successes.append(env.is_success_cause(cause, length))
        report.causes.append(cause)
        if not np.isfinite(weights).all():
            report.fault = {
                "diagnostic": Diagnostic(
                    "error", "NONFINITE_RESULT",
                    "policy weights diverged to a non-finite value").to_dict(),
                "step_index": report.total_steps - 1,
            }
            break

    report.obs_stats = stats.summary()
    report.wall_time = time.monotonic() - t0
    return policy, report


def evaluate_policy(env: EnvModel, policy: Policy, config: LearnerConfig,
                    reward: RewardProgram | None = None,
                    eval_episodes: int | None = None,
                    seed: int | None = None,
                    ) -> tuple[float, dict[str, float], list[TrajectoryLog]]:
    """Greedy rollout over eval_episodes seeded seed, seed+1, ...

    Returns (success_rate, objective metrics, trajectory logs). DSL
    faults during evaluation log a 0.0 custom reward for that step.
    """
    episodes = eval_episodes if eval_episodes is not None else config.eval_episodes
    base_seed = seed if seed is not None else config.seed
    logs: list[TrajectoryLog] = []
    for k in range(episodes):
        ep_seed = base_seed + k
        obs = env.reset(seed=ep_seed)
        steps: list[dict] = []
        cause = "none"
        length = 0
        while True:
            feats = tile_features(obs, env, config)
            action = policy.greedy_action(feats)
            result = env.step(action)
            length += 1
            done = result.terminated or result.truncated
            if reward is None:
                custom = result.legacy_reward
            else:
                success_now = done and env.is_success_cause(result.cause, length)
                failure_now = result.terminated and env.is_failure_cause(result.cause)
                try:
                    custom = evaluate(reward, result.observation,
                                      success_now, failure_now,
                                      r_max=config.r_max).reward
                except EvalFault:
                    custom = 0.0
            steps.append({
                "observation": result.observation,
                "action": action,
                "custom_reward": custom,
                "legacy_reward": result.legacy_reward,
            })
            obs = result.observation
            if done:
                cause = result.cause
                break
        log = TrajectoryLog(seed=ep_seed, steps=steps, cause=cause,
                            success=env.is_success_cause(cause, length))
        logs.append(log)
    metrics = env.objective_metrics(logs)
    success_rate = sum(log.success for log in logs) / len(logs)
    return success_rate, metrics, logs
