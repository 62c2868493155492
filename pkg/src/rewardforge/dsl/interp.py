"""Evaluator for well-typed reward programs.

IEEE double arithmetic throughout. Division by zero, log of a
non-positive value, sqrt of a negative value and an ill-posed pow are
DOMAIN_FAULTs; any non-finite intermediate is a NONFINITE_RESULT.
Both abort evaluation. A finite final result is clamped to
[-r_max, +r_max] and the clamp is reported to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ast import Binary, BoolLit, Call, Expr, If, Name, NumLit, RewardProgram, Unary
from .diagnostics import Diagnostic, EvalFault

DEFAULT_R_MAX = 1000.0


@dataclass(frozen=True)
class EvalResult:
    reward: float
    clamped: bool


def _fault(code: str, message: str, node: Expr) -> EvalFault:
    return EvalFault(Diagnostic("error", code, message, node.span))


def _check_finite(value: float, node: Expr) -> float:
    if not math.isfinite(value):
        raise _fault("NONFINITE_RESULT", "expression produced a non-finite value", node)
    return value


def evaluate(program: RewardProgram, obs: dict[str, float],
             success: bool, failure: bool,
             r_max: float = DEFAULT_R_MAX) -> EvalResult:
    """Evaluate a type-checked program; raises EvalFault on runtime faults."""
    env: dict[str, float | bool] = dict(obs)
    env["success"] = bool(success)
    env["failure"] = bool(failure)

    def go(e: Expr):
        if isinstance(e, NumLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Name):
            return env[e.ident]
        if isinstance(e, Unary):
            v = go(e.operand)
            return (not v) if e.op == "not" else _check_finite(-v, e)
        if isinstance(e, Binary):
            return binop(e)
        if isinstance(e, Call):
            return call(e)
        if isinstance(e, If):
            return go(e.then) if go(e.cond) else go(e.orelse)
        raise AssertionError(f"unhandled node {type(e).__name__}")

    def binop(e: Binary):
        op = e.op
        if op == "and":
            return go(e.left) and go(e.right)
        if op == "or":
            return go(e.left) or go(e.right)
        a = go(e.left)
        b = go(e.right)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "+":
            return _check_finite(a + b, e)
        if op == "-":
            return _check_finite(a - b, e)
        if op == "*":
            return _check_finite(a * b, e)
        if op == "/":
            if b == 0.0:
                raise _fault("DOMAIN_FAULT", "division by zero", e)
            return _check_finite(a / b, e)
        if op == "^":
            try:
                return _check_finite(math.pow(a, b), e)
            except (ValueError, OverflowError):
                raise _fault("DOMAIN_FAULT", f"cannot raise {a} to the power {b}", e)
        raise AssertionError(f"unhandled operator {op!r}")

    def call(e: Call):
        args = [go(a) for a in e.args]
        f = e.func
        if f == "abs":
            return abs(args[0])
        if f == "min":
            return min(args)
        if f == "max":
            return max(args)
        if f == "exp":
            try:
                return _check_finite(math.exp(args[0]), e)
            except OverflowError:
                raise _fault("NONFINITE_RESULT", "exp overflowed", e)
        if f == "log":
            if args[0] <= 0.0:
                raise _fault("DOMAIN_FAULT", f"log of non-positive value {args[0]}", e)
            return math.log(args[0])
        if f == "sqrt":
            if args[0] < 0.0:
                raise _fault("DOMAIN_FAULT", f"sqrt of negative value {args[0]}", e)
            return math.sqrt(args[0])
        if f == "tanh":
            return math.tanh(args[0])
        if f == "sin":
            return math.sin(args[0])
        if f == "cos":
            return math.cos(args[0])
        if f == "sign":
            x = args[0]
            return 0.0 if x == 0.0 else math.copysign(1.0, x)
        if f == "clamp":
            x, lo, hi = args
            if lo > hi:
                raise _fault("DOMAIN_FAULT",
                             f"clamp lower bound {lo} exceeds upper bound {hi}", e)
            return min(max(x, lo), hi)
        raise AssertionError(f"unhandled builtin {f!r}")

    for b in program.bindings:
        env[b.name] = go(b.expr)
    raw = go(program.result)
    raw = _check_finite(float(raw), program.result)
    if raw > r_max:
        return EvalResult(r_max, True)
    if raw < -r_max:
        return EvalResult(-r_max, True)
    return EvalResult(raw, False)
