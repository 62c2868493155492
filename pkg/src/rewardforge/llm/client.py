"""Chat-completions client (OpenAI wire protocol) plus a scripted mock.

The mock backend consumes an ordered transcript and is what makes the
whole pipeline runnable offline; it is strictly sequential, so callers
must serialize traffic through it.
"""

from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

_BACKOFF_BASE = 1.0
_BACKOFF_FACTOR = 2.0


class LlmError(Exception):
    code = "LLM_FAILURE"


class TransportError(LlmError):
    code = "TRANSPORT_ERROR"


class BadResponse(LlmError):
    code = "BAD_RESPONSE"


class MockExhausted(LlmError):
    code = "MOCK_EXHAUSTED"


class MockMismatch(LlmError):
    code = "MOCK_MISMATCH"


class VisionUnsupported(LlmError):
    code = "VISION_UNSUPPORTED"


@dataclass(frozen=True)
class ContentPart:
    kind: str  # "text" | "image"
    text: str = ""
    media_type: str = ""
    data_b64: str = ""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    parts: tuple[ContentPart, ...]

    def __post_init__(self) -> None:
        assert self.role in ("system", "user", "assistant")
        assert self.parts

    @staticmethod
    def text(role: str, text: str) -> "ChatMessage":
        return ChatMessage(role, (ContentPart("text", text=text),))

    def visible_text(self) -> str:
        return "\n".join(p.text for p in self.parts if p.kind == "text")

    def image_parts(self) -> list[ContentPart]:
        return [p for p in self.parts if p.kind == "image"]


def image_part(path: Path | str) -> ContentPart:
    path = Path(path)
    suffix = path.suffix.lower()
    media = {"png": "image/png", "jpg": "image/jpeg", "jpeg": "image/jpeg"}.get(
        suffix.lstrip("."))
    if media is None:
        raise ValueError(f"goal image must be PNG or JPEG, got {path.name!r}")
    data = base64.b64encode(path.read_bytes()).decode("ascii")
    return ContentPart("image", media_type=media, data_b64=data)


def image_part_from_bytes(data: bytes, media_type: str = "image/png") -> ContentPart:
    return ContentPart("image", media_type=media_type,
                       data_b64=base64.b64encode(data).decode("ascii"))


@dataclass(frozen=True)
class GoalPrompt:
    text: str | None = None
    image: str | None = None  # file path

    def __post_init__(self) -> None:
        if not self.text and not self.image:
            raise ValueError("goal prompt needs text, an image, or both")
        if self.image is not None and not Path(self.image).is_file():
            raise ValueError(f"goal image not found: {self.image}")

    def to_dict(self) -> dict:
        return {"text": self.text, "image": self.image}


@dataclass(frozen=True)
class LlmEndpoint:
    base_url: str
    model: str
    api_key_env: str = "REWARDFORGE_LLM_API_KEY"
    temperature: float = 0.7
    timeout: float = 60.0
    max_retries: int = 2
    vision_capable: bool = False

    def __post_init__(self) -> None:
        assert self.timeout > 0
        assert self.max_retries >= 0


def endpoint_from_env(role: str = "", **overrides) -> LlmEndpoint:
    """Build an endpoint from REWARDFORGE_LLM_* variables.

    role ("CRITIC" | "CODER" | "VLM") selects the per-role override
    suffix; unsuffixed variables are the fallback.
    """
    def get(name: str, default: str | None = None) -> str | None:
        if role:
            v = os.environ.get(f"REWARDFORGE_LLM_{name}_{role.upper()}")
            if v is not None:
                return v
        return os.environ.get(f"REWARDFORGE_LLM_{name}", default)

    base_url = get("BASE_URL", "http://localhost:11434/v1")
    model = get("MODEL", "qwen2.5-coder")
    kwargs = dict(base_url=base_url, model=model)
    kwargs.update(overrides)
    return LlmEndpoint(**kwargs)


def _wire_messages(messages: list[ChatMessage]) -> list[dict]:
    wire = []
    for m in messages:
        if len(m.parts) == 1 and m.parts[0].kind == "text":
            wire.append({"role": m.role, "content": m.parts[0].text})
            continue
        content = []
        for p in m.parts:
            if p.kind == "text":
                content.append({"type": "text", "text": p.text})
            else:
                content.append({"type": "image_url", "image_url": {
                    "url": f"data:{p.media_type};base64,{p.data_b64}"}})
        wire.append({"role": m.role, "content": content})
    return wire


class HttpChatBackend:
    """Live chat-completions backend with retry on transport errors."""

    vision_capable = property(lambda self: self.endpoint.vision_capable)

    def __init__(self, endpoint: LlmEndpoint, sleep=time.sleep):
        self.endpoint = endpoint
        self._sleep = sleep

    def chat(self, messages: list[ChatMessage]) -> str:
        ep = self.endpoint
        url = ep.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(ep.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": ep.model,
            "messages": _wire_messages(messages),
            "temperature": ep.temperature,
        }
        last_exc: Exception | None = None
        for attempt in range(ep.max_retries + 1):
            if attempt:
                self._sleep(_BACKOFF_BASE * _BACKOFF_FACTOR ** (attempt - 1))
            try:
                resp = httpx.post(url, headers=headers, json=body, timeout=ep.timeout)
            except httpx.HTTPError as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise BadResponse(f"request rejected ({resp.status_code}): {resp.text[:500]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise BadResponse(f"unparseable chat response: {exc}") from exc
        raise TransportError(f"chat failed after {ep.max_retries + 1} attempts: {last_exc}")


@dataclass
class TranscriptEntry:
    response: str
    expect_substring: str | None = None


class MockChatBackend:
    """Deterministic scripted backend. Entries are consumed in order; an
    entry with expect_substring rejects any request not containing it."""

    def __init__(self, entries: list[TranscriptEntry], vision_capable: bool = True):
        self.entries = list(entries)
        self.requests: list[list[ChatMessage]] = []
        self._next = 0
        self.vision_capable = vision_capable

    @staticmethod
    def load(path: Path | str, vision_capable: bool = True) -> "MockChatBackend":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = [TranscriptEntry(response=e["response"],
                                   expect_substring=e.get("expect_substring"))
                   for e in raw]
        return MockChatBackend(entries, vision_capable=vision_capable)

    def chat(self, messages: list[ChatMessage]) -> str:
        self.requests.append(list(messages))
        if self._next >= len(self.entries):
            raise MockExhausted(
                f"transcript exhausted after {len(self.entries)} entries")
        entry = self.entries[self._next]
        if entry.expect_substring is not None:
            outgoing = "\n".join(m.visible_text() for m in messages)
            if entry.expect_substring not in outgoing:
                raise MockMismatch(
                    f"entry {self._next}: expected substring "
                    f"{entry.expect_substring!r} not found in request")
        self._next += 1
        return entry.response


def chat(backend, messages: list[ChatMessage]) -> str:
    """Send messages through a backend (live endpoint or mock)."""
    if isinstance(backend, LlmEndpoint):
        backend = HttpChatBackend(backend)
    return backend.chat(messages)
