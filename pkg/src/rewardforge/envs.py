"""Deterministic CartPole and MountainCar reference environments.

Dynamics follow the classic Gymnasium formulations: CartPole uses
explicit Euler with the standard cart-pole equations and a 0.02 s
timestep; MountainCar uses the usual discrete-force hill climb. The
random source is Python's Mersenne Twister (random.Random) seeded
per reset, so trajectories are reproducible from (seed, actions).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .dsl import ObservationSpec, ObsVariable

CAUSES = ("none", "pole_fell", "cart_out_of_bounds", "goal_reached", "time_limit")

CARTPOLE_SPEC = ObservationSpec((
    ObsVariable("cart_position", -4.8, 4.8, "m", "position of the cart on the track"),
    ObsVariable("cart_velocity", -3.0, 3.0, "m/s", "velocity of the cart"),
    ObsVariable("pole_angle", -0.418, 0.418, "rad", "angle of the pole from vertical"),
    ObsVariable("pole_angular_velocity", -3.5, 3.5, "rad/s", "angular velocity of the pole"),
))

MOUNTAINCAR_SPEC = ObservationSpec((
    ObsVariable("position", -1.2, 0.6, "m", "position of the car along the track"),
    ObsVariable("velocity", -0.07, 0.07, "m/s", "velocity of the car"),
))

# CartPole constants
_GRAVITY = 9.8
_CART_MASS = 1.0
_POLE_MASS = 0.1
_TOTAL_MASS = _CART_MASS + _POLE_MASS
_HALF_POLE = 0.5
_POLE_MASS_LENGTH = _POLE_MASS * _HALF_POLE
_FORCE_MAG = 10.0
_TAU = 0.02
_X_LIMIT = 2.4
_THETA_LIMIT = 0.2095

# MountainCar constants
_MC_FORCE = 0.001
_MC_GRAVITY = 0.0025
_MC_GOAL = 0.5


class EnvError(Exception):
    pass


class InvalidAction(EnvError):
    pass


class StepAfterDone(EnvError):
    pass


@dataclass
class StepResult:
    observation: dict[str, float]
    legacy_reward: float
    terminated: bool
    truncated: bool
    cause: str  # one of CAUSES

    def __post_init__(self) -> None:
        assert not (self.terminated and self.truncated)
        assert (self.cause == "none") == (not self.terminated and not self.truncated)


@dataclass
class TrajectoryLog:
    seed: int
    steps: list[dict]  # {"observation", "action", "custom_reward", "legacy_reward"}
    cause: str
    success: bool
    episode_length: int = field(default=0)

    def __post_init__(self) -> None:
        if not self.episode_length:
            self.episode_length = len(self.steps)
        assert self.episode_length == len(self.steps)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "steps": self.steps,
            "cause": self.cause,
            "success": self.success,
            "episode_length": self.episode_length,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrajectoryLog":
        return TrajectoryLog(
            seed=d["seed"], steps=d["steps"], cause=d["cause"],
            success=d["success"], episode_length=d["episode_length"],
        )

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @staticmethod
    def load(path: Path) -> "TrajectoryLog":
        return TrajectoryLog.from_dict(json.loads(path.read_text(encoding="utf-8")))


class EnvModel:
    """Base class: concrete envs implement _reset_state/_step_state."""

    id: str
    spec: ObservationSpec
    action_count: int
    max_steps: int

    def __init__(self) -> None:
        self._state: list[float] | None = None
        self._steps = 0
        self._done = True

    def reset(self, seed: int) -> dict[str, float]:
        rng = random.Random(seed)
        self._state = self._reset_state(rng)
        self._steps = 0
        self._done = False
        return self.observation()

    def observation(self) -> dict[str, float]:
        assert self._state is not None
        return dict(zip(self.spec.names, self._state))

    def step(self, action: int) -> StepResult:
        if self._done:
            raise StepAfterDone("episode already finished; call reset")
        if not 0 <= action < self.action_count:
            raise InvalidAction(f"action {action} outside [0, {self.action_count})")
        self._state, terminated, cause = self._step_state(self._state, action)
        self._steps += 1
        truncated = False
        if not terminated and self._steps >= self.max_steps:
            truncated = True
            cause = "time_limit"
        self._done = terminated or truncated
        return StepResult(self.observation(), self._legacy_reward(),
                          terminated, truncated, cause)

    # concrete env API -------------------------------------------------

    def _reset_state(self, rng: random.Random) -> list[float]:
        raise NotImplementedError

    def _step_state(self, state, action) -> tuple[list[float], bool, str]:
        raise NotImplementedError

    def _legacy_reward(self) -> float:
        raise NotImplementedError

    def success(self, log: TrajectoryLog) -> bool:
        raise NotImplementedError

    def is_success_cause(self, cause: str, episode_length: int) -> bool:
        raise NotImplementedError

    def is_failure_cause(self, cause: str) -> bool:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def success_description(self) -> str:
        raise NotImplementedError

    def objective_metrics(self, logs: list[TrajectoryLog]) -> dict[str, float]:
        raise NotImplementedError

    def render_state(self, observation: dict[str, float]) -> dict:
        raise NotImplementedError


class CartPole(EnvModel):
    id = "cartpole"
    spec = CARTPOLE_SPEC
    action_count = 2
    max_steps = 500

    def _reset_state(self, rng: random.Random) -> list[float]:
        return [rng.uniform(-0.05, 0.05) for _ in range(4)]

    def _step_state(self, state, action):
        x, x_dot, theta, theta_dot = state
        force = _FORCE_MAG if action == 1 else -_FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + _POLE_MASS_LENGTH * theta_dot ** 2 * sin_t) / _TOTAL_MASS
        theta_acc = (_GRAVITY * sin_t - cos_t * temp) / (
            _HALF_POLE * (4.0 / 3.0 - _POLE_MASS * cos_t ** 2 / _TOTAL_MASS))
        x_acc = temp - _POLE_MASS_LENGTH * theta_acc * cos_t / _TOTAL_MASS
        # positions update with pre-update velocities (explicit Euler)
        x = x + _TAU * x_dot
        x_dot = x_dot + _TAU * x_acc
        theta = theta + _TAU * theta_dot
        theta_dot = theta_dot + _TAU * theta_acc
        state = [x, x_dot, theta, theta_dot]
        if abs(theta) > _THETA_LIMIT:
            return state, True, "pole_fell"
        if abs(x) > _X_LIMIT:
            return state, True, "cart_out_of_bounds"
        return state, False, "none"

    def _legacy_reward(self) -> float:
        return 1.0

    def success(self, log: TrajectoryLog) -> bool:
        return log.cause == "time_limit" and log.episode_length >= self.max_steps

    def is_success_cause(self, cause: str, episode_length: int) -> bool:
        return cause == "time_limit" and episode_length >= self.max_steps

    def is_failure_cause(self, cause: str) -> bool:
        return cause in ("pole_fell", "cart_out_of_bounds")

    def describe(self) -> str:
        lines = ["Environment: CartPole", ""]
        lines += ["A pole is attached by an un-actuated joint to a cart moving"
                  " along a frictionless track. The agent pushes the cart left"
                  " or right to keep the pole balanced.", "", "Observations:"]
        lines += _variable_lines(self.spec)
        lines += [
            "",
            "Actions: 0 = push left, 1 = push right",
            "Termination: |cart_position| > 2.4 or |pole_angle| > 0.2095",
            "Max episode length: 500 steps",
        ]
        return "\n".join(lines)

    def success_description(self) -> str:
        return ("An episode counts as a success when it runs the full 500"
                " steps without the pole falling over or the cart leaving"
                " the track.")

    def objective_metrics(self, logs: list[TrajectoryLog]) -> dict[str, float]:
        _require_logs(logs)
        xs, thetas, total_steps = 0.0, 0.0, 0
        for log in logs:
            for s in log.steps:
                xs += abs(s["observation"]["cart_position"])
                thetas += abs(s["observation"]["pole_angle"])
            total_steps += log.episode_length
        return {
            "cart_position_mean_abs": xs / total_steps,
            "pole_angle_mean_abs": thetas / total_steps,
            "mean_episode_length": total_steps / len(logs),
            "success_rate": sum(log.success for log in logs) / len(logs),
        }

    def render_state(self, observation: dict[str, float]) -> dict:
        x = observation["cart_position"]
        theta = observation["pole_angle"]
        return {
            "env": "cartpole",
            "cart_x": x,
            "pole_end_x": x + math.sin(theta),
            "pole_end_y": math.cos(theta),
        }


class MountainCar(EnvModel):
    id = "mountaincar"
    spec = MOUNTAINCAR_SPEC
    action_count = 3
    max_steps = 200

    def _reset_state(self, rng: random.Random) -> list[float]:
        return [rng.uniform(-0.6, -0.4), 0.0]

    def _step_state(self, state, action):
        position, velocity = state
        velocity += (action - 1) * _MC_FORCE + math.cos(3 * position) * (-_MC_GRAVITY)
        velocity = min(max(velocity, -0.07), 0.07)
        position += velocity
        position = min(max(position, -1.2), 0.6)
        if position <= -1.2 and velocity < 0:
            velocity = 0.0
        state = [position, velocity]
        if position >= _MC_GOAL:
            return state, True, "goal_reached"
        return state, False, "none"

    def _legacy_reward(self) -> float:
        return -1.0

    def success(self, log: TrajectoryLog) -> bool:
        return log.cause == "goal_reached"

    def is_success_cause(self, cause: str, episode_length: int) -> bool:
        return cause == "goal_reached"

    def is_failure_cause(self, cause: str) -> bool:
        return cause == "time_limit"

    def describe(self) -> str:
        lines = ["Environment: MountainCar", ""]
        lines += ["A car sits in a valley between two hills. The engine is too"
                  " weak to climb the right hill directly; the agent must build"
                  " momentum by rocking back and forth.", "", "Observations:"]
        lines += _variable_lines(self.spec)
        lines += [
            "",
            "Actions: 0 = push left, 1 = no push, 2 = push right",
            "Termination: position >= 0.5 (the goal flag is reached)",
            "Max episode length: 200 steps",
        ]
        return "\n".join(lines)

    def success_description(self) -> str:
        return ("An episode counts as a success when the car reaches the"
                " goal flag at position 0.5 within 200 steps.")

    def objective_metrics(self, logs: list[TrajectoryLog]) -> dict[str, float]:
        _require_logs(logs)
        max_positions = [
            max(s["observation"]["position"] for s in log.steps)
            for log in logs
        ]
        return {
            "max_position_mean": sum(max_positions) / len(logs),
            "mean_episode_length": sum(l.episode_length for l in logs) / len(logs),
            "success_rate": sum(log.success for log in logs) / len(logs),
        }

    def render_state(self, observation: dict[str, float]) -> dict:
        position = observation["position"]
        return {
            "env": "mountaincar",
            "car_x": position,
            "car_y": math.sin(3 * position),
        }


def _variable_lines(spec: ObservationSpec) -> list[str]:
    return [
        f"{v.name} ({v.unit}): {v.description}, range [{_fmt(v.low)}, {_fmt(v.high)}]"
        for v in spec.variables
    ]


def _fmt(x: float) -> str:
    return f"{x:g}"


def _require_logs(logs: list[TrajectoryLog]) -> None:
    if not logs:
        raise ValueError("EMPTY_LOGS: need at least one trajectory log")


ENVS = {"cartpole": CartPole, "mountaincar": MountainCar}


def make_env(env_id: str) -> EnvModel:
    try:
        return ENVS[env_id]()
    except KeyError:
        raise EnvError(f"ENV_UNKNOWN: no environment named {env_id!r}") from None
