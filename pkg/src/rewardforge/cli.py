"""Command-line entry points."""

from __future__ import annotations

import json
import sys
import threading
import time
from pathlib import Path

import click

from . import llm, pipeline as pl
from .envs import EnvError, TrajectoryLog, make_env
from .learner import LearnerConfig, evaluate_policy, train


@click.group()
def main() -> None:
    """rewardforge: LLM-designed reward functions for classic control."""


def _backends(mock_transcript: str | None):
    if mock_transcript:
        mock = llm.MockChatBackend.load(mock_transcript)
        return mock, mock, mock
    critic = llm.HttpChatBackend(llm.endpoint_from_env("CRITIC"))
    coder = llm.HttpChatBackend(llm.endpoint_from_env("CODER"))
    vlm = llm.HttpChatBackend(llm.endpoint_from_env("VLM", vision_capable=True))
    return critic, coder, vlm


def _tty_feedback(cand, description) -> pl.FeedbackEvent:
    click.echo(f"\n[{cand.id}] observed behavior:\n{description}")
    verdict = click.prompt("verdict", type=click.Choice(["revise", "accept", "reject"]),
                           default="revise")
    text = ""
    if verdict == "revise":
        while not text.strip():
            text = click.prompt("feedback")
    return pl.FeedbackEvent(source="human", text=text, timestamp=time.time(),
                            candidate_id=cand.id, verdict=verdict)


@main.command("run")
@click.option("--env", "env_id", required=True,
              type=click.Choice(["cartpole", "mountaincar"]))
@click.option("--goal-text", default=None)
@click.option("--goal-image", default=None, type=click.Path(exists=True))
@click.option("--candidates", default=4, show_default=True)
@click.option("--feedback", default="auto", show_default=True,
              type=click.Choice(["auto", "human", "vlm", "none"]))
@click.option("--threshold", default=None, type=float)
@click.option("--episodes", default=600, show_default=True)
@click.option("--step-budget", default=None, type=int)
@click.option("--eval-episodes", default=100, show_default=True)
@click.option("--refinements", default=3, show_default=True)
@click.option("--repair-attempts", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--mock-transcript", default=None, type=click.Path(exists=True))
@click.option("--runs-dir", default="./runs", show_default=True)
@click.option("--parallel-jobs", default=None, type=int)
@click.option("--feedback-timeout", default=3600.0, show_default=True)
@click.option("--serve", "serve_port", default=None, type=int,
              help="Also serve the API on this port while the run executes.")
def cmd_run(env_id, goal_text, goal_image, candidates, feedback, threshold,
            episodes, step_budget, eval_episodes, refinements, repair_attempts,
            seed, mock_transcript, runs_dir, parallel_jobs, feedback_timeout,
            serve_port):
    """Run the full pipeline for one goal prompt."""
    if not goal_text and not goal_image:
        raise click.UsageError("provide --goal-text and/or --goal-image")
    feedback_provider = None
    if feedback == "human":
        if serve_port is None:
            if not sys.stdin.isatty():
                raise click.UsageError(
                    "--feedback human needs --serve or an interactive terminal")
            feedback_provider = _tty_feedback

    config = pl.RunConfig(
        env_id=env_id,
        goal=llm.GoalPrompt(text=goal_text, image=goal_image),
        n_candidates=candidates,
        max_repair_attempts=repair_attempts,
        max_refinement_iters=refinements,
        threshold=threshold,
        feedback_mode=feedback,
        learner=LearnerConfig(training_episodes=episodes,
                              total_step_budget=step_budget,
                              eval_episodes=eval_episodes, seed=seed),
        parallel_jobs=parallel_jobs,
        seed=seed,
        runs_dir=runs_dir,
        feedback_timeout=feedback_timeout,
    )
    critic, coder, vlm = _backends(mock_transcript)

    server_thread = None
    if serve_port is not None:
        from .server import create_app
        import uvicorn

        app = create_app(runs_dir)
        server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1",
                                               port=serve_port,
                                               log_level="warning"))
        server_thread = threading.Thread(target=server.run, daemon=True)
        server_thread.start()

    try:
        record = pl.run(config, critic, coder, vlm,
                        feedback_provider=feedback_provider)
    except (pl.PipelineError, llm.LlmError, EnvError, OSError) as exc:
        click.echo(f"pipeline failed: {exc}", err=True)
        sys.exit(1)

    baseline = record.baseline["success_rate"] if record.baseline else float("nan")
    for cand in record.candidates:
        rate = "-" if cand.success_rate is None else f"{cand.success_rate:.2f}"
        click.echo(f"{cand.id}: verdict={cand.verdict} success_rate={rate} "
                   f"attempts={cand.repair_attempts} gen={cand.generation}")
    best = record.best_candidate_id
    if best is not None:
        best_cand = next(c for c in record.candidates if c.id == best)
        click.echo(f"best: {best} success_rate={best_cand.success_rate:.2f} "
                   f"vs baseline {baseline:.2f}")
    else:
        click.echo(f"best: none (baseline {baseline:.2f})")
    click.echo(f"run: {record.run_id} status={record.status}")
    sys.exit(0 if record.status == "done" else 1)


@main.command("eval-baseline")
@click.option("--env", "env_id", required=True,
              type=click.Choice(["cartpole", "mountaincar"]))
@click.option("--episodes", default=600, show_default=True)
@click.option("--step-budget", default=None, type=int)
@click.option("--eval-episodes", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_eval_baseline(env_id, episodes, step_budget, eval_episodes, seed):
    """Train and evaluate the legacy-reward baseline."""
    cfg = LearnerConfig(training_episodes=episodes, total_step_budget=step_budget,
                        eval_episodes=eval_episodes, seed=seed)
    policy, report = train(make_env(env_id), None, cfg)
    rate, metrics, _ = evaluate_policy(make_env(env_id), policy, cfg,
                                       seed=seed + 100_000)
    click.echo(f"legacy baseline on {env_id}: success_rate={rate:.2f} "
               f"({report.episodes} episodes, {report.total_steps} steps)")
    for name, value in sorted(metrics.items()):
        click.echo(f"  {name}: {value:.4f}")


@main.command("describe")
@click.argument("env_id", type=click.Choice(["cartpole", "mountaincar"]))
def cmd_describe(env_id):
    """Print the environment description exactly as the LLM receives it."""
    click.echo(make_env(env_id).describe(), nl=False)
    click.echo()


@main.command("replay")
@click.argument("run_id")
@click.argument("candidate", type=int)
@click.argument("episode", type=int)
@click.option("--runs-dir", default="./runs", show_default=True)
@click.option("--json", "as_json", is_flag=True,
              help="Emit the scene-record stream as JSON.")
def cmd_replay(run_id, candidate, episode, runs_dir, as_json):
    """Print the step table (or scene JSON) of one evaluation episode."""
    path = (Path(runs_dir) / run_id / f"candidate_{candidate}" /
            "trajectories" / f"ep_{episode}.json")
    if not path.is_file():
        click.echo(f"not found: {path}", err=True)
        sys.exit(1)
    try:
        rec = pl.load_run(runs_dir, run_id)
    except pl.PipelineError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    log = TrajectoryLog.load(path)
    env = make_env(rec.config.env_id)
    if as_json:
        scenes = [env.render_state(s["observation"]) for s in log.steps]
        click.echo(json.dumps(scenes))
        return
    names = env.spec.names
    click.echo("step  action  custom_r  legacy_r  " + "  ".join(names))
    for i, s in enumerate(log.steps):
        obs = "  ".join(f"{s['observation'][n]:+.4f}" for n in names)
        click.echo(f"{i:4d}  {s['action']:6d}  {s['custom_reward']:+8.3f}"
                   f"  {s['legacy_reward']:+8.3f}  {obs}")
    click.echo(f"cause={log.cause} success={log.success} "
               f"length={log.episode_length}")


@main.command("serve")
@click.option("--port", default=8765, show_default=True)
@click.option("--runs-dir", default="./runs", show_default=True)
@click.option("--static-dir", default=None, type=click.Path())
def cmd_serve(port, runs_dir, static_dir):
    """Serve the feedback API and console."""
    from .server import serve

    if static_dir is None:
        guess = Path("frontend") / "dist"
        static_dir = guess if guess.is_dir() else None
    serve(port, runs_dir, static_dir=static_dir)


if __name__ == "__main__":
    main()
