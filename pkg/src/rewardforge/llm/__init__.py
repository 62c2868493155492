from .client import (
    BadResponse,
    ChatMessage,
    ContentPart,
    GoalPrompt,
    HttpChatBackend,
    LlmEndpoint,
    LlmError,
    MockChatBackend,
    MockExhausted,
    MockMismatch,
    TranscriptEntry,
    TransportError,
    VisionUnsupported,
    chat,
    endpoint_from_env,
    image_part,
    image_part_from_bytes,
)
from .describer import describe_behavior, describe_behavior_vlm, render_frame
from .prompts import (
    build_generation_request,
    build_refinement_request,
    build_stepback_request,
)

__all__ = [
    "BadResponse", "ChatMessage", "ContentPart", "GoalPrompt",
    "HttpChatBackend", "LlmEndpoint", "LlmError", "MockChatBackend",
    "MockExhausted", "MockMismatch", "TranscriptEntry", "TransportError",
    "VisionUnsupported", "build_generation_request",
    "build_refinement_request", "build_stepback_request", "chat",
    "describe_behavior", "describe_behavior_vlm", "endpoint_from_env",
    "image_part", "image_part_from_bytes", "render_frame",
]
