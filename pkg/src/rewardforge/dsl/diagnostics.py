"""Diagnostics shared by the parser, type checker and evaluator.

Every diagnostic carries a stable machine-readable code so the repair
prompt can quote it verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

CODES = frozenset({
    "PARSE_UNEXPECTED_TOKEN",
    "PARSE_UNTERMINATED",
    "PARSE_ARITY",
    "TYPE_MISMATCH",
    "UNKNOWN_IDENTIFIER",
    "DUPLICATE_BINDING",
    "CLAMP_BOUNDS",
    "DOMAIN_FAULT",
    "NONFINITE_RESULT",
    "EXTRACT_NO_CODE",
})


@dataclass(frozen=True)
class SourceSpan:
    """1-based, inclusive region of the source text."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.end_line, self.end_col) < (self.start_line, self.start_col):
            raise ValueError("span end precedes start")

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        start = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        end = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return SourceSpan(start[0], start[1], end[0], end[1])

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan | None = None
    hint: str | None = None

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ValueError(f"unknown diagnostic code {self.code!r}")
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")
        if self.severity not in ("error", "warning"):
            raise ValueError(f"bad severity {self.severity!r}")

    def render(self) -> str:
        loc = f" at {self.span}" if self.span else ""
        text = f"{self.code}{loc}: {self.message}"
        if self.hint:
            text += f" (hint: {self.hint})"
        return text

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "span": None if self.span is None else [
                self.span.start_line, self.span.start_col,
                self.span.end_line, self.span.end_col,
            ],
            "hint": self.hint,
        }

    @staticmethod
    def from_dict(d: dict) -> "Diagnostic":
        span = d.get("span")
        return Diagnostic(
            severity=d["severity"],
            code=d["code"],
            message=d["message"],
            span=None if span is None else SourceSpan(*span),
            hint=d.get("hint"),
        )


class DslError(Exception):
    """Raised by parse/typecheck when the program is rejected."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.render() for d in self.diagnostics))


class EvalFault(Exception):
    """Raised when evaluation hits a domain fault or a non-finite value."""

    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.render())
