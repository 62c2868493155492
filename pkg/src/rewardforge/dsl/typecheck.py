"""Type checker: annotates every node with Num or Bool.

All problems are reported, not just the first; error recovery assigns
no type to a bad node and suppresses cascading complaints about it.
"""

from __future__ import annotations

from .ast import (
    BOOL, BUILTINS, NUM, RESERVED, Binary, BoolLit, Call, Expr, If, Name,
    NumLit, ObservationSpec, RewardProgram, Unary,
)
from .diagnostics import Diagnostic, DslError

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
_ARITH_OPS = ("+", "-", "*", "/", "^")


def _edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _const(e: Expr) -> float | None:
    """Literal value of a (possibly negated) numeric literal, else None."""
    if isinstance(e, NumLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-":
        inner = _const(e.operand)
        return None if inner is None else -inner
    return None


def _nearest(name: str, candidates: list[str]) -> str | None:
    best, best_d = None, 3  # hint only when distance <= 2
    for cand in candidates:
        d = _edit_distance(name, cand)
        if d < best_d:
            best, best_d = cand, d
    return best


def typecheck(program: RewardProgram, spec: ObservationSpec) -> list[Diagnostic]:
    """Annotate types in place; return all diagnostics (errors and warnings)."""
    diags: list[Diagnostic] = []
    env: dict[str, str] = {v.name: NUM for v in spec.variables}
    env["success"] = BOOL
    env["failure"] = BOOL
    known = list(env)

    def infer(e: Expr) -> str | None:
        if isinstance(e, NumLit):
            e.ty = NUM
        elif isinstance(e, BoolLit):
            e.ty = BOOL
        elif isinstance(e, Name):
            ty = env.get(e.ident)
            if ty is None:
                hint = _nearest(e.ident, known)
                diags.append(Diagnostic(
                    "error", "UNKNOWN_IDENTIFIER",
                    f"unknown identifier '{e.ident}'", e.span,
                    hint=f"did you mean '{hint}'?" if hint else None,
                ))
                return None
            e.ty = ty
        elif isinstance(e, Unary):
            want = NUM if e.op == "-" else BOOL
            got = infer(e.operand)
            if got is not None and got != want:
                diags.append(Diagnostic(
                    "error", "TYPE_MISMATCH",
                    f"operand of '{e.op}' must be {want}, got {got}", e.span,
                ))
                return None
            if got is None:
                return None
            e.ty = want
        elif isinstance(e, Binary):
            lt, rt = infer(e.left), infer(e.right)
            if e.op in _ARITH_OPS:
                ok = _demand(e, lt, NUM, f"left operand of '{e.op}'")
                ok = _demand(e, rt, NUM, f"right operand of '{e.op}'") and ok
                if not ok:
                    return None
                e.ty = NUM
            elif e.op in _CMP_OPS:
                ok = _demand(e, lt, NUM, f"left operand of '{e.op}'")
                ok = _demand(e, rt, NUM, f"right operand of '{e.op}'") and ok
                if not ok:
                    return None
                e.ty = BOOL
            else:  # and / or
                ok = _demand(e, lt, BOOL, f"left operand of '{e.op}'")
                ok = _demand(e, rt, BOOL, f"right operand of '{e.op}'") and ok
                if not ok:
                    return None
                e.ty = BOOL
        elif isinstance(e, Call):
            arg_tys = [infer(a) for a in e.args]
            ok = True
            for k, ty in enumerate(arg_tys):
                ok = _demand(e.args[k], ty, NUM, f"argument {k + 1} of {e.func}") and ok
            if not ok:
                return None
            if e.func == "clamp":
                lo, hi = _const(e.args[1]), _const(e.args[2])
                if lo is not None and hi is not None and lo > hi:
                    diags.append(Diagnostic(
                        "warning", "CLAMP_BOUNDS",
                        f"clamp lower bound {lo} exceeds upper bound {hi}", e.span,
                    ))
            e.ty = NUM
        elif isinstance(e, If):
            ct = infer(e.cond)
            _demand(e.cond, ct, BOOL, "if-condition")
            tt, et = infer(e.then), infer(e.orelse)
            if tt is None or et is None:
                return None
            if tt != et:
                diags.append(Diagnostic(
                    "error", "TYPE_MISMATCH",
                    f"if-branches disagree: then is {tt}, else is {et}", e.span,
                ))
                return None
            e.ty = tt
        else:
            raise AssertionError(f"unhandled node {type(e).__name__}")
        return e.ty

    def _demand(node: Expr, got: str | None, want: str, what: str) -> bool:
        if got is None:
            return False  # already reported
        if got != want:
            diags.append(Diagnostic(
                "error", "TYPE_MISMATCH",
                f"{what} must be {want}, got {got}", node.span,
            ))
            return False
        return True

    for b in program.bindings:
        if b.name in env:
            kind = ("observation variable" if b.name in spec.names
                    else "reserved name" if b.name in RESERVED
                    else "binding")
            diags.append(Diagnostic(
                "error", "DUPLICATE_BINDING",
                f"'{b.name}' shadows a {kind}", b.name_span,
            ))
        elif b.name in BUILTINS:
            diags.append(Diagnostic(
                "error", "DUPLICATE_BINDING",
                f"'{b.name}' shadows a builtin function", b.name_span,
            ))
        ty = infer(b.expr)
        if b.name not in env and b.name not in BUILTINS and ty is not None:
            env[b.name] = ty
            known.append(b.name)

    result_ty = infer(program.result)
    if result_ty == BOOL:
        diags.append(Diagnostic(
            "error", "TYPE_MISMATCH",
            "program result must be Num, got Bool", program.result.span,
        ))
    return diags


def typecheck_strict(program: RewardProgram, spec: ObservationSpec) -> list[Diagnostic]:
    """Like typecheck, but raises DslError when any error was found.

    Returns the warnings on success.
    """
    diags = typecheck(program, spec)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise DslError(diags)
    return diags
