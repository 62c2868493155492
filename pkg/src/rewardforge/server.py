"""HTTP/JSON API over the runs directory, plus static hosting for the
feedback console.

The server is a read-only view of persisted runs with one exception:
posting feedback appends to a run's feedback.json, which an awaiting
pipeline picks up by polling. Nothing else in a run directory is ever
mutated here.
"""

from __future__ import annotations

import asyncio
import json
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .envs import TrajectoryLog, make_env
from .pipeline import FeedbackEvent, RunNotFound, SchemaMismatch, load_run, list_runs


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={
        "status": status, "code": code, "message": message})


class FeedbackBody(BaseModel):
    text: str = ""
    verdict: str = "revise"


def create_app(runs_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    runs_dir = Path(runs_dir)
    app = FastAPI(title="rewardforge")

    def _load(run_id: str):
        return load_run(runs_dir, run_id)

    @app.get("/api/runs")
    def api_runs():
        out = []
        for rec in list_runs(runs_dir):
            out.append({
                "run_id": rec.run_id,
                "status": rec.status,
                "env_id": rec.config.env_id,
                "n_candidates": len(rec.candidates),
                "best_candidate_id": rec.best_candidate_id,
                "awaiting_candidate_id": rec.awaiting_candidate_id,
                "created_at": rec.created_at,
            })
        return out

    @app.get("/api/runs/{run_id}")
    def api_run(run_id: str):
        try:
            return _load(run_id).to_dict()
        except (RunNotFound, SchemaMismatch) as exc:
            return _error(404, "RUN_NOT_FOUND", str(exc))

    @app.get("/api/runs/{run_id}/candidates/{k}/trajectories/{ep}")
    def api_trajectory(run_id: str, k: int, ep: int):
        try:
            rec = _load(run_id)
        except (RunNotFound, SchemaMismatch) as exc:
            return _error(404, "RUN_NOT_FOUND", str(exc))
        path = runs_dir / run_id / f"candidate_{k}" / "trajectories" / f"ep_{ep}.json"
        if not path.is_file():
            return _error(404, "TRAJECTORY_NOT_FOUND",
                          f"candidate_{k} episode {ep} not found in {run_id}")
        log = TrajectoryLog.load(path)
        env = make_env(rec.config.env_id)
        body = log.to_dict()
        body["scenes"] = [env.render_state(s["observation"]) for s in log.steps]
        return body

    @app.post("/api/runs/{run_id}/candidates/{k}/feedback")
    def api_feedback(run_id: str, k: int, body: FeedbackBody):
        try:
            rec = _load(run_id)
        except (RunNotFound, SchemaMismatch) as exc:
            return _error(404, "RUN_NOT_FOUND", str(exc))
        if body.verdict not in ("revise", "accept", "reject"):
            return _error(400, "BAD_VERDICT", f"unknown verdict {body.verdict!r}")
        if body.verdict == "revise" and not body.text.strip():
            return _error(400, "EMPTY_TEXT",
                          "feedback text must be non-empty for verdict 'revise'")
        candidate_id = f"candidate_{k}"
        if rec.status != "awaiting_feedback":
            return _error(409, "NOT_AWAITING",
                          f"run {run_id} is {rec.status}, not awaiting feedback")
        if rec.awaiting_candidate_id != candidate_id:
            return _error(409, "NOT_AWAITING",
                          f"run {run_id} awaits feedback on "
                          f"{rec.awaiting_candidate_id}, not {candidate_id}")
        event = FeedbackEvent(source="human", text=body.text,
                              timestamp=time.time(), candidate_id=candidate_id,
                              verdict=body.verdict)
        path = runs_dir / run_id / "feedback.json"
        events = []
        if path.is_file():
            events = json.loads(path.read_text(encoding="utf-8"))
        events.append(event.to_dict())
        path.write_text(json.dumps(events, indent=2), encoding="utf-8")
        return {"ok": True, "event": event.to_dict()}

    @app.get("/api/events")
    async def api_events(request: Request):
        async def stream():
            known: dict[str, str] = {}
            first = True
            while True:
                if await request.is_disconnected():
                    return
                for rec in list_runs(runs_dir):
                    prev = known.get(rec.run_id)
                    if prev != rec.status:
                        known[rec.run_id] = rec.status
                        payload = json.dumps({
                            "run_id": rec.run_id, "status": rec.status,
                            "awaiting_candidate_id": rec.awaiting_candidate_id,
                        })
                        yield f"event: status\ndata: {payload}\n\n"
                if first:
                    yield ": connected\n\n"
                    first = False
                await asyncio.sleep(0.5)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="console")

    return app


def serve(port: int, runs_dir: str | Path,
          static_dir: str | Path | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(runs_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
