"""Pull reward-program source out of a chat response."""

from __future__ import annotations

import re

from .diagnostics import Diagnostic, DslError

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_program(chat_text: str) -> str:
    """Return DSL source from an LLM response.

    Preference order: the first fenced code block; otherwise the region
    from the first line starting with 'let' or 'return' through the last
    line ending in ';'. Raises DslError(EXTRACT_NO_CODE) when neither
    exists.
    """
    m = _FENCE_RE.search(chat_text)
    if m:
        return m.group(1).strip()

    lines = chat_text.splitlines()
    start = next(
        (i for i, ln in enumerate(lines)
         if ln.lstrip().startswith(("let ", "return ", "let\t", "return\t"))
         or ln.strip() in ("let", "return")
         or re.match(r"\s*(let|return)\b", ln)),
        None,
    )
    if start is not None:
        end = next(
            (i for i in range(len(lines) - 1, start - 1, -1)
             if lines[i].rstrip().endswith(";")),
            None,
        )
        if end is not None:
            return "\n".join(lines[start:end + 1]).strip()

    raise DslError([Diagnostic(
        "error", "EXTRACT_NO_CODE",
        "response contains no fenced code block and no let/return region",
    )])
