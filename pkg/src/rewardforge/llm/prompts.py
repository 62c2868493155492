"""Prompt construction. Templates live as versioned text files next to
this module; builders are pure, so identical inputs give byte-identical
messages."""

from __future__ import annotations

import json
from importlib import resources
from string import Template

from ..dsl import Diagnostic
from .client import ChatMessage, ContentPart, GoalPrompt, image_part

_TEMPLATE_CACHE: dict[str, Template] = {}


def _template(name: str) -> Template:
    if name not in _TEMPLATE_CACHE:
        text = (resources.files("rewardforge.llm") / "templates" / f"{name}.txt"
                ).read_text(encoding="utf-8")
        _TEMPLATE_CACHE[name] = Template(text)
    return _TEMPLATE_CACHE[name]


def build_stepback_request(goal: GoalPrompt, d_env: str) -> list[ChatMessage]:
    system = ChatMessage.text("system", _template("critic_system").template)
    body = _template("stepback_user").substitute(
        d_env=d_env,
        goal_text=goal.text or "(the goal is given as the attached annotated image)",
    )
    parts: list[ContentPart] = [ContentPart("text", text=body)]
    if goal.image is not None:
        parts.append(image_part(goal.image))
    return [system, ChatMessage("user", tuple(parts))]


def build_generation_request(stepback: str, d_env: str, f_succ_description: str,
                             grammar_reference: str,
                             prior_diagnostics: list[Diagnostic] | None = None,
                             prior_source: str | None = None,
                             ) -> list[ChatMessage]:
    system = ChatMessage.text("system", _template("coder_system").template)
    body = _template("generation_user").substitute(
        stepback=stepback,
        d_env=d_env,
        f_succ_description=f_succ_description,
        grammar_reference=grammar_reference,
    )
    if prior_diagnostics:
        section = ["", "Your previous attempt was rejected."]
        if prior_source:
            section += ["Previous program:", "```reward", prior_source, "```"]
        section.append("Fix these errors:")
        section += [f"- {d.render()}" for d in prior_diagnostics]
        section.append("Output a corrected program in one fenced code block.")
        body += "\n".join(section) + "\n"
    return [system, ChatMessage.text("user", body)]


def build_refinement_request(candidate_summary: dict, feedback_text: str,
                             goal: GoalPrompt, d_env: str) -> list[ChatMessage]:
    """candidate_summary keys: source, success_rate, metrics, obs_stats,
    clamp_events, fault_count."""
    system = ChatMessage.text("system", _template("coder_system").template)
    body = _template("refinement_user").substitute(
        goal_text=goal.text or "(goal given as an annotated image)",
        d_env=d_env,
        source=candidate_summary["source"],
        success_rate=f"{candidate_summary['success_rate']:g}",
        metrics=json.dumps(candidate_summary["metrics"], indent=2, sort_keys=True),
        obs_stats=json.dumps(candidate_summary["obs_stats"], indent=2, sort_keys=True),
        clamp_events=candidate_summary["clamp_events"],
        fault_count=candidate_summary["fault_count"],
        feedback_text=feedback_text,
    )
    return [system, ChatMessage.text("user", body)]
