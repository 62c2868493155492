"""End-to-end orchestration: step-back, candidate generation with a
repair loop, budget-fair training against the legacy baseline,
acceptance, refinement with feedback, and run persistence.

The human feedback channel is the filesystem: when a run needs human
input it persists status=awaiting_feedback and polls feedback.json;
the API server (or anything else) appends events there.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import llm
from .dsl import (
    Diagnostic, DslError, EvalFault, GRAMMAR_REFERENCE, RewardProgram,
    evaluate, extract_program, parse, pretty_print, typecheck,
)
from .envs import EnvError, EnvModel, TrajectoryLog, make_env
from .learner import LearnerConfig, TrainingReport, evaluate_policy, train

SCHEMA_VERSION = 1
_EVAL_SEED_OFFSET = 100_000

_baseline_cache: dict[tuple, tuple[float, dict, TrainingReport]] = {}
_baseline_lock = threading.Lock()


class PipelineError(Exception):
    pass


class LlmFailure(PipelineError):
    pass


class FeedbackTimeout(PipelineError):
    pass


class RunNotFound(PipelineError):
    pass


class SchemaMismatch(PipelineError):
    pass


@dataclass
class RunConfig:
    env_id: str
    goal: llm.GoalPrompt
    n_candidates: int = 4
    max_repair_attempts: int = 3
    max_refinement_iters: int = 3
    threshold: float | None = None
    compare_to_legacy: bool = True
    feedback_mode: str = "auto"  # auto | human | vlm | none
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    parallel_jobs: int | None = None
    seed: int = 0
    runs_dir: str = "./runs"
    feedback_timeout: float = 3600.0
    feedback_poll: float = 0.2
    vlm_frame_count: int = 4

    def __post_init__(self) -> None:
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.max_repair_attempts < 1:
            raise ValueError("max_repair_attempts must be >= 1")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.feedback_mode not in ("auto", "human", "vlm", "none"):
            raise ValueError(f"unknown feedback mode {self.feedback_mode!r}")

    @property
    def jobs(self) -> int:
        return self.parallel_jobs or self.n_candidates

    def to_dict(self) -> dict:
        return {
            "env_id": self.env_id,
            "goal": self.goal.to_dict(),
            "n_candidates": self.n_candidates,
            "max_repair_attempts": self.max_repair_attempts,
            "max_refinement_iters": self.max_refinement_iters,
            "threshold": self.threshold,
            "compare_to_legacy": self.compare_to_legacy,
            "feedback_mode": self.feedback_mode,
            "learner": self.learner.to_dict(),
            "parallel_jobs": self.parallel_jobs,
            "seed": self.seed,
            "runs_dir": self.runs_dir,
            "feedback_timeout": self.feedback_timeout,
            "feedback_poll": self.feedback_poll,
            "vlm_frame_count": self.vlm_frame_count,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        d = dict(d)
        d["goal"] = llm.GoalPrompt(**d["goal"])
        d["learner"] = LearnerConfig.from_dict(d["learner"])
        return RunConfig(**d)


@dataclass
class FeedbackEvent:
    source: str  # auto_describer | human | vlm
    text: str
    timestamp: float
    candidate_id: str
    verdict: str = "revise"  # revise | accept | reject

    def __post_init__(self) -> None:
        if not self.text and self.verdict == "revise":
            raise ValueError("feedback text must be non-empty")

    def to_dict(self) -> dict:
        return {"source": self.source, "text": self.text,
                "timestamp": self.timestamp,
                "candidate_id": self.candidate_id, "verdict": self.verdict}

    @staticmethod
    def from_dict(d: dict) -> "FeedbackEvent":
        return FeedbackEvent(**d)


@dataclass
class Candidate:
    id: str
    generation: int = 0
    parent_id: str | None = None
    source: str | None = None
    repair_attempts: int = 0
    diagnostics_history: list[list[dict]] = field(default_factory=list)
    request_history: list[dict] = field(default_factory=list)
    train_report: dict | None = None
    success_rate: float | None = None
    metrics: dict | None = None
    verdict: str = "failed"  # accepted | rejected | failed
    program: RewardProgram | None = field(default=None, compare=False)
    logs: list[TrajectoryLog] = field(default_factory=list, compare=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "generation": self.generation,
            "parent_id": self.parent_id,
            "source": self.source,
            "repair_attempts": self.repair_attempts,
            "diagnostics_history": self.diagnostics_history,
            "request_history": self.request_history,
            "train_report": self.train_report,
            "success_rate": self.success_rate,
            "metrics": self.metrics,
            "verdict": self.verdict,
        }

    @staticmethod
    def from_dict(d: dict) -> "Candidate":
        return Candidate(**d)


@dataclass
class RunRecord:
    run_id: str
    config: RunConfig
    baseline: dict | None = None  # {"success_rate", "metrics"}
    candidates: list[Candidate] = field(default_factory=list)
    status: str = "running"  # running | awaiting_feedback | done | failed
    awaiting_candidate_id: str | None = None
    created_at: float = 0.0

    @property
    def best_candidate_id(self) -> str | None:
        scored = [c for c in self.candidates
                  if c.verdict != "failed" and c.success_rate is not None]
        if not scored:
            return None
        best = max(scored, key=lambda c: c.success_rate)
        # ties broken by earliest id
        for c in self.candidates:
            if c.verdict != "failed" and c.success_rate == best.success_rate:
                return c.id
        return best.id

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "config": self.config.to_dict(),
            "baseline": self.baseline,
            "candidates": [c.to_dict() for c in self.candidates],
            "best_candidate_id": self.best_candidate_id,
            "status": self.status,
            "awaiting_candidate_id": self.awaiting_candidate_id,
            "created_at": self.created_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"run manifest schema {d.get('schema_version')!r}, "
                f"expected {SCHEMA_VERSION}")
        return RunRecord(
            run_id=d["run_id"],
            config=RunConfig.from_dict(d["config"]),
            baseline=d["baseline"],
            candidates=[Candidate.from_dict(c) for c in d["candidates"]],
            status=d["status"],
            awaiting_candidate_id=d.get("awaiting_candidate_id"),
            created_at=d.get("created_at", 0.0),
        )


def acceptance_decision(candidate_rate: float, baseline_rate: float,
                        threshold: float | None) -> bool:
    """Threshold wins when present; otherwise compare against baseline."""
    if threshold is not None:
        return candidate_rate >= threshold
    return candidate_rate >= baseline_rate


def probe_points(env: EnvModel, limit: int = 16) -> list[dict[str, float]]:
    """Observation probes: the range midpoint plus range corners, capped."""
    variables = env.spec.variables
    mid = {v.name: (v.low + v.high) / 2.0 for v in variables}
    points = [mid]
    n = len(variables)
    for mask in range(2 ** n):
        if len(points) >= limit:
            break
        points.append({
            v.name: (v.high if (mask >> d) & 1 else v.low)
            for d, v in enumerate(variables)
        })
    return points


def _probe_program(program: RewardProgram, env: EnvModel,
                   r_max: float) -> list[Diagnostic]:
    for obs in probe_points(env):
        try:
            evaluate(program, obs, False, False, r_max=r_max)
        except EvalFault as fault:
            return [fault.diagnostic]
    return []


def new_run_id() -> str:
    return f"run-{time.strftime('%Y%m%d-%H%M%S')}-{uuid.uuid4().hex[:6]}"


class Pipeline:
    """One run of the generate/train/evaluate/refine loop.

    All LLM traffic goes through the orchestration thread; only the
    training jobs run in a worker pool.
    """

    def __init__(self, config: RunConfig, critic_backend, coder_backend,
                 vlm_backend=None, feedback_provider=None):
        self.config = config
        self.critic = critic_backend
        self.coder = coder_backend
        self.vlm = vlm_backend if vlm_backend is not None else critic_backend
        # optional callable (candidate, description) -> FeedbackEvent,
        # used for terminal human feedback; None means poll feedback.json
        self.feedback_provider = feedback_provider
        self.env = make_env(config.env_id)
        self.d_env = self.env.describe()
        self.stepback: str = ""
        self.record = RunRecord(run_id=new_run_id(), config=config,
                                created_at=time.time())
        self.run_dir = Path(config.runs_dir) / self.record.run_id
        self.feedback_events: list[FeedbackEvent] = []
        self._consumed_feedback = 0

    # ---------------------------------------------------------------- run

    def run(self) -> RunRecord:
        try:
            self._persist()
            self.stepback = llm.chat(self.critic, llm.build_stepback_request(
                self.config.goal, self.d_env))
            for k in range(self.config.n_candidates):
                cand = self.generate_candidate(f"candidate_{k}")
                self.record.candidates.append(cand)
            self._train_baseline()
            trainable = [c for c in self.record.candidates if c.program is not None]
            with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
                list(pool.map(self._train_and_evaluate, trainable))
            self._persist()
            if self.config.feedback_mode != "none":
                for cand in list(self.record.candidates):
                    if cand.verdict == "rejected":
                        self._refine_loop(cand)
            self.record.status = "done"
        except Exception:
            self.record.status = "failed"
            self._persist()
            raise
        self._persist()
        return self.record

    # ------------------------------------------------------- generation

    def generate_candidate(self, cand_id: str, generation: int = 0,
                           parent_id: str | None = None,
                           first_messages=None) -> Candidate:
        """Repair loop: request, extract, parse, typecheck, probe; feed
        diagnostics back until a valid program or the budget runs out."""
        cand = Candidate(id=cand_id, generation=generation, parent_id=parent_id)
        budget = self.config.max_repair_attempts + (1 if first_messages else 0)
        prior_diags: list[Diagnostic] | None = None
        prior_source: str | None = None
        for attempt in range(budget):
            if attempt == 0 and first_messages is not None:
                messages = first_messages
            else:
                messages = llm.build_generation_request(
                    self.stepback, self.d_env, self.env.success_description(),
                    GRAMMAR_REFERENCE, prior_diagnostics=prior_diags,
                    prior_source=prior_source)
            try:
                response = llm.chat(self.coder, messages)
            except llm.LlmError as exc:
                raise LlmFailure(f"coder request failed: {exc}") from exc
            cand.repair_attempts += 1
            cand.request_history.append({
                "request": [
                    {"role": m.role, "text": m.visible_text(),
                     "images": len(m.image_parts())}
                    for m in messages],
                "response": response,
            })
            diags = self._validate(cand, response)
            if not diags:
                return cand
            cand.diagnostics_history.append([d.to_dict() for d in diags])
            prior_diags, prior_source = diags, cand.source
            cand.source = None
            cand.program = None
        cand.verdict = "failed"
        return cand

    def _validate(self, cand: Candidate, response: str) -> list[Diagnostic]:
        try:
            source = extract_program(response)
        except DslError as exc:
            return exc.diagnostics
        cand.source = source
        try:
            program = parse(source)
        except DslError as exc:
            return exc.diagnostics
        diags = typecheck(program, self.env.spec)
        errors = [d for d in diags if d.severity == "error"]
        if errors:
            return diags
        probe_faults = _probe_program(program, self.env, self.config.learner.r_max)
        if probe_faults:
            return probe_faults
        cand.source = pretty_print(program)
        cand.program = program
        cand.verdict = "rejected"  # until evaluated
        return []

    # --------------------------------------------------------- training

    def _candidate_seed(self, cand: Candidate) -> int:
        k = int(cand.id.rsplit("_", 1)[1])
        return self.config.seed + k

    def _train_baseline(self) -> None:
        cfg = self.config.learner.with_seed(self.config.seed)
        key = (self.config.env_id, json.dumps(cfg.to_dict(), sort_keys=True))
        with _baseline_lock:
            cached = _baseline_cache.get(key)
        if cached is None:
            env = make_env(self.config.env_id)
            policy, report = train(env, None, cfg)
            rate, metrics, _ = evaluate_policy(
                make_env(self.config.env_id), policy, cfg,
                seed=cfg.seed + _EVAL_SEED_OFFSET)
            cached = (rate, metrics, report)
            with _baseline_lock:
                _baseline_cache[key] = cached
        rate, metrics, report = cached
        self.record.baseline = {"success_rate": rate, "metrics": metrics}
        self._baseline_report = report

    def _train_and_evaluate(self, cand: Candidate) -> None:
        cfg = self.config.learner.with_seed(self._candidate_seed(cand))
        env = make_env(self.config.env_id)
        policy, report = train(env, cand.program, cfg)
        cand.train_report = report.to_dict()
        if report.fault is not None:
            cand.verdict = "failed"
            cand.diagnostics_history.append([report.fault["diagnostic"]])
            return
        rate, metrics, logs = evaluate_policy(
            make_env(self.config.env_id), policy, cfg, reward=cand.program,
            seed=cfg.seed + _EVAL_SEED_OFFSET)
        cand.success_rate = rate
        cand.metrics = metrics
        cand.logs = logs
        accepted = acceptance_decision(
            rate, self.record.baseline["success_rate"],
            self.config.threshold if self.config.threshold is not None
            else (None if self.config.compare_to_legacy else 0.0))
        cand.verdict = "accepted" if accepted else "rejected"

    # ------------------------------------------------------- refinement

    def _refine_loop(self, cand: Candidate) -> None:
        parent = cand
        for _ in range(self.config.max_refinement_iters):
            try:
                event = self._obtain_feedback(parent)
            except FeedbackTimeout:
                return
            self._append_feedback(event)
            if event.verdict == "accept":
                parent.verdict = "accepted"
                self._persist()
                return
            if event.verdict == "reject":
                self._persist()
                return
            child = self.refine_candidate(parent, event)
            self.record.candidates.append(child)
            if child.program is not None:
                self._train_and_evaluate(child)
            self._persist()
            if child.verdict == "accepted":
                return
            if child.program is None:
                return  # repair budget exhausted; keep parent verdict
            parent = child

    def refine_candidate(self, parent: Candidate,
                         feedback: FeedbackEvent) -> Candidate:
        summary = {
            "source": parent.source,
            "success_rate": parent.success_rate,
            "metrics": parent.metrics,
            "obs_stats": (parent.train_report or {}).get("obs_stats", {}),
            "clamp_events": (parent.train_report or {}).get("clamp_events", 0),
            "fault_count": (parent.train_report or {}).get("fault_count", 0),
        }
        messages = llm.build_refinement_request(
            summary, feedback.text, self.config.goal, self.d_env)
        child_id = f"candidate_{len(self.record.candidates)}"
        return self.generate_candidate(
            child_id, generation=parent.generation + 1,
            parent_id=parent.id, first_messages=messages)

    def _obtain_feedback(self, cand: Candidate) -> FeedbackEvent:
        mode = self.config.feedback_mode
        if mode == "auto":
            text = llm.describe_behavior(self.env, cand.logs)
            return FeedbackEvent("auto_describer", text, time.time(), cand.id)
        if mode == "vlm":
            try:
                text = llm.describe_behavior_vlm(
                    self.vlm, self.env, cand.logs, self.config.vlm_frame_count)
            except llm.LlmError as exc:
                raise LlmFailure(f"vlm description failed: {exc}") from exc
            return FeedbackEvent("vlm", text, time.time(), cand.id)
        # human
        if self.feedback_provider is not None:
            description = llm.describe_behavior(self.env, cand.logs)
            return self.feedback_provider(cand, description)
        return self._await_feedback_file(cand)

    def _await_feedback_file(self, cand: Candidate) -> FeedbackEvent:
        self.record.status = "awaiting_feedback"
        self.record.awaiting_candidate_id = cand.id
        self._persist()
        deadline = time.monotonic() + self.config.feedback_timeout
        path = self.run_dir / "feedback.json"
        try:
            while time.monotonic() < deadline:
                events = _read_feedback(path)
                if len(events) > self._consumed_feedback:
                    event = events[self._consumed_feedback]
                    self._consumed_feedback += 1
                    self.feedback_events = events
                    return event
                time.sleep(self.config.feedback_poll)
            raise FeedbackTimeout(
                f"no feedback for {cand.id} within "
                f"{self.config.feedback_timeout}s")
        finally:
            self.record.status = "running"
            self.record.awaiting_candidate_id = None
            self._persist()

    def _append_feedback(self, event: FeedbackEvent) -> None:
        path = self.run_dir / "feedback.json"
        events = _read_feedback(path)
        if not any(e.timestamp == event.timestamp and e.candidate_id == event.candidate_id
                   and e.source == event.source for e in events):
            events.append(event)
            _write_feedback(path, events)
        self.feedback_events = events
        self._consumed_feedback = len(events)

    # ------------------------------------------------------ persistence

    def _persist(self) -> None:
        persist_run(self.record, stepback=self.stepback,
                    baseline_report=getattr(self, "_baseline_report", None))


# ----------------------------------------------------------- persistence


def _read_feedback(path: Path) -> list[FeedbackEvent]:
    if not path.is_file():
        return []
    raw = json.loads(path.read_text(encoding="utf-8"))
    return [FeedbackEvent.from_dict(e) for e in raw]


def _write_feedback(path: Path, events: list[FeedbackEvent]) -> None:
    path.write_text(json.dumps([e.to_dict() for e in events], indent=2),
                    encoding="utf-8")


def persist_run(record: RunRecord, stepback: str = "",
                baseline_report: TrainingReport | None = None) -> Path:
    run_dir = Path(record.config.runs_dir) / record.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(run_dir / "run.json",
                  json.dumps(record.to_dict(), indent=2))
    if baseline_report is not None:
        bdir = run_dir / "baseline"
        bdir.mkdir(exist_ok=True)
        _atomic_write(bdir / "train_report.json",
                      json.dumps(baseline_report.to_dict()))
    for cand in record.candidates:
        cdir = run_dir / cand.id
        cdir.mkdir(exist_ok=True)
        _atomic_write(cdir / "prompt_stepback.txt", stepback)
        _atomic_write(cdir / "request_history.json",
                      json.dumps(cand.request_history, indent=2))
        _atomic_write(cdir / "diagnostics.json", json.dumps({
            "verdict": cand.verdict,
            "repair_attempts": cand.repair_attempts,
            "diagnostics_history": cand.diagnostics_history,
        }, indent=2))
        if cand.source is not None and cand.program is not None:
            _atomic_write(cdir / "reward.rdsl", cand.source + "\n")
        if cand.train_report is not None:
            _atomic_write(cdir / "train_report.json",
                          json.dumps(cand.train_report))
        if cand.success_rate is not None:
            _atomic_write(cdir / "eval.json", json.dumps({
                "success_rate": cand.success_rate,
                "metrics": cand.metrics,
            }, indent=2))
        if cand.logs:
            tdir = cdir / "trajectories"
            tdir.mkdir(exist_ok=True)
            for i, log in enumerate(cand.logs):
                log.save(tdir / f"ep_{i}.json")
    return run_dir


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def load_run(runs_dir: str | Path, run_id: str) -> RunRecord:
    manifest = Path(runs_dir) / run_id / "run.json"
    if not manifest.is_file():
        raise RunNotFound(f"no run named {run_id!r} under {runs_dir}")
    return RunRecord.from_dict(json.loads(manifest.read_text(encoding="utf-8")))


def list_runs(runs_dir: str | Path) -> list[RunRecord]:
    root = Path(runs_dir)
    if not root.is_dir():
        return []
    records = []
    for child in sorted(root.iterdir()):
        if (child / "run.json").is_file():
            try:
                records.append(load_run(root, child.name))
            except (SchemaMismatch, json.JSONDecodeError):
                continue
    return records


def run(config: RunConfig, critic_backend, coder_backend,
        vlm_backend=None, feedback_provider=None) -> RunRecord:
    """Execute one full pipeline run."""
    return Pipeline(config, critic_backend, coder_backend, vlm_backend,
                    feedback_provider).run()
