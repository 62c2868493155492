"""Behavior descriptions from trajectories.

describe_behavior is the deterministic stand-in for a video language
model; describe_behavior_vlm is the optional live path that renders
sampled frames and asks a vision-capable endpoint instead.
"""

from __future__ import annotations

import io
import math

from ..envs import CAUSES, EnvModel, TrajectoryLog
from .client import ChatMessage, ContentPart, VisionUnsupported, chat, image_part_from_bytes
from .prompts import _template


def describe_behavior(env: EnvModel, logs: list[TrajectoryLog]) -> str:
    if not logs:
        raise ValueError("EMPTY_LOGS: need at least one trajectory log")
    n = len(logs)
    sr = sum(log.success for log in logs) / n
    mean_len = sum(log.episode_length for log in logs) / n
    text = (f"Across {n} evaluation episodes: success rate {sr:.2f}; "
            f"mean episode length {mean_len:.1f} steps. ")
    for var in env.spec.names:
        values = [s["observation"][var] for log in logs for s in log.steps]
        mean = sum(values) / len(values)
        text += (f"{var}: mean {mean:.3f}, "
                 f"range [{min(values):.3f}, {max(values):.3f}]. ")
    counts = {c: 0 for c in CAUSES}
    for log in logs:
        counts[log.cause] += 1
    causes = ", ".join(f"{c} {100 * counts[c] / n:.0f}%"
                       for c in CAUSES if counts[c] > 0)
    return text + f"Termination causes: {causes}."


def render_frame(env: EnvModel, observation: dict[str, float],
                 size: int = 256) -> bytes:
    """Line-drawing PNG of one state: white background, black strokes."""
    from PIL import Image, ImageDraw

    img = Image.new("RGB", (size, size), "white")
    draw = ImageDraw.Draw(img)
    scene = env.render_state(observation)
    if scene["env"] == "cartpole":
        # world x in [-2.4, 2.4] -> pixels; cart sits on a track line
        def px(x):
            return (x + 2.4) / 4.8 * (size - 20) + 10

        track_y = size * 0.7
        draw.line([(0, track_y), (size, track_y)], fill="black", width=1)
        cx = px(scene["cart_x"])
        draw.rectangle([cx - 16, track_y - 10, cx + 16, track_y + 10],
                       outline="black", width=2)
        scale = size * 0.35
        end_x = cx + (scene["pole_end_x"] - scene["cart_x"]) * scale
        end_y = track_y - 10 - scene["pole_end_y"] * scale
        draw.line([(cx, track_y - 10), (end_x, end_y)], fill="black", width=3)
    else:
        def px(x):
            return (x + 1.2) / 1.8 * (size - 20) + 10

        def py(y):
            return size * 0.55 - y * size * 0.3

        hill = [(px(-1.2 + i * 1.8 / 99), py(math.sin(3 * (-1.2 + i * 1.8 / 99))))
                for i in range(100)]
        draw.line(hill, fill="black", width=1)
        cx, cy = px(scene["car_x"]), py(scene["car_y"])
        draw.ellipse([cx - 7, cy - 17, cx + 7, cy - 3], outline="black", width=3)
        flag_x, flag_y = px(0.5), py(math.sin(1.5))
        draw.line([(flag_x, flag_y), (flag_x, flag_y - 25)], fill="black", width=2)

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def _sample_indices(length: int, count: int) -> list[int]:
    if count <= 0:
        return []
    if count == 1:
        return [0]
    return [round(i * (length - 1) / (count - 1)) for i in range(count)]


def describe_behavior_vlm(backend, env: EnvModel, logs: list[TrajectoryLog],
                          frame_count: int) -> str:
    """Render frame_count states sampled uniformly across the best and
    worst episode (by custom return) and ask a vision endpoint to
    describe the behavior."""
    if not logs:
        raise ValueError("EMPTY_LOGS: need at least one trajectory log")
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    if not getattr(backend, "vision_capable", False):
        raise VisionUnsupported("the configured endpoint is not vision-capable")

    def ret(log: TrajectoryLog) -> float:
        return sum(s["custom_reward"] for s in log.steps)

    best = max(logs, key=ret)
    worst = min(logs, key=ret)
    n_best = math.ceil(frame_count / 2)
    n_worst = frame_count - n_best
    frames: list[ContentPart] = []
    for log, count in ((best, n_best), (worst, n_worst)):
        for i in _sample_indices(log.episode_length, count):
            png = render_frame(env, log.steps[i]["observation"])
            frames.append(image_part_from_bytes(png))
    body = _template("vlm_user").substitute(d_env=env.describe())
    message = ChatMessage("user", tuple([ContentPart("text", text=body)] + frames))
    return chat(backend, [message])
