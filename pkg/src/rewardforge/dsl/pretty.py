"""Canonical pretty-printer.

One binding per line, single spaces around binary operators, minimal
parentheses. parse(pretty_print(p)) is structurally equal to p, and
pretty_print is a fixed point over parse.
"""

from __future__ import annotations

from .ast import Binary, BoolLit, Call, Expr, If, Name, NumLit, RewardProgram, Unary

_PREC_IF = 0
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_NEG = 7
_PREC_POW = 8
_PREC_ATOM = 9

_BIN_PREC = {
    "or": _PREC_OR, "and": _PREC_AND,
    "<": _PREC_CMP, "<=": _PREC_CMP, ">": _PREC_CMP, ">=": _PREC_CMP,
    "==": _PREC_CMP, "!=": _PREC_CMP,
    "+": _PREC_ADD, "-": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL,
    "^": _PREC_POW,
}


def _num(value: float) -> str:
    return repr(value)


def _emit(e: Expr, min_prec: int) -> str:
    if isinstance(e, NumLit):
        return _num(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Name):
        return e.ident

    if isinstance(e, Unary):
        if e.op == "not":
            prec = _PREC_NOT
            text = f"not {_emit(e.operand, _PREC_NOT)}"
        else:
            prec = _PREC_NEG
            # Parenthesize everything below atom level (including powers,
            # which would reparse fine but read ambiguously); chained
            # negation stays bare.
            if isinstance(e.operand, Unary) and e.operand.op == "-":
                inner = _emit(e.operand, 0)
            else:
                inner = _emit(e.operand, _PREC_ATOM)
            text = f"-{inner}"
    elif isinstance(e, Binary):
        prec = _BIN_PREC[e.op]
        if e.op == "^":
            text = f"{_emit(e.left, _PREC_ATOM)} ^ {_emit(e.right, _PREC_NEG)}"
        elif prec == _PREC_CMP:
            text = f"{_emit(e.left, _PREC_ADD)} {e.op} {_emit(e.right, _PREC_ADD)}"
        else:
            # left-associative chain
            text = f"{_emit(e.left, prec)} {e.op} {_emit(e.right, prec + 1)}"
    elif isinstance(e, Call):
        prec = _PREC_ATOM
        text = f"{e.func}({', '.join(_emit(a, 0) for a in e.args)})"
    elif isinstance(e, If):
        prec = _PREC_IF
        text = (f"if {_emit(e.cond, 0)} then {_emit(e.then, 0)} "
                f"else {_emit(e.orelse, 0)}")
    else:
        raise AssertionError(f"unhandled node {type(e).__name__}")

    return f"({text})" if prec < min_prec else text


def pretty_print(program: RewardProgram) -> str:
    lines = [f"let {b.name} = {_emit(b.expr, 0)};" for b in program.bindings]
    lines.append(f"return {_emit(program.result, 0)};")
    return "\n".join(lines)
