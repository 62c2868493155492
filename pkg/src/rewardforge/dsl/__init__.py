"""Reward expression language: parse, type-check, evaluate, pretty-print.

Everything here is pure and immutable after construction, so programs
can be shared freely across concurrent training jobs.
"""

from .ast import (
    BOOL,
    BUILTINS,
    NUM,
    Binary,
    Binding,
    BoolLit,
    Call,
    Expr,
    If,
    Name,
    NumLit,
    ObsVariable,
    ObservationSpec,
    RewardProgram,
    Unary,
)
from .diagnostics import CODES, Diagnostic, DslError, EvalFault, SourceSpan
from .extract import extract_program
from .interp import DEFAULT_R_MAX, EvalResult, evaluate
from .parser import parse
from .pretty import pretty_print
from .typecheck import typecheck, typecheck_strict

GRAMMAR_REFERENCE = """\
program   ::= binding* "return" expr ";"
binding   ::= "let" IDENT "=" expr ";"
expr      ::= "if" expr "then" expr "else" expr | or_expr
or_expr   ::= and_expr ( "or" and_expr )*
and_expr  ::= not_expr ( "and" not_expr )*
not_expr  ::= "not" not_expr | cmp_expr
cmp_expr  ::= add_expr ( ("<"|"<="|">"|">="|"=="|"!=") add_expr )?
add_expr  ::= mul_expr ( ("+"|"-") mul_expr )*
mul_expr  ::= unary ( ("*"|"/") unary )*
unary     ::= "-" unary | power
power     ::= atom ( "^" unary )?            -- right-associative
atom      ::= NUMBER | IDENT | "true" | "false" | call | "(" expr ")"
call      ::= FUNC "(" expr ("," expr)* ")"
FUNC: abs(x), min(a, b), max(a, b), exp(x), log(x), sqrt(x), tanh(x),
      sin(x), cos(x), sign(x), clamp(x, lo, hi)
Comments run from '#' to end of line.
Types: numbers (Num) and booleans (Bool). Comparisons take numbers and
yield booleans; and/or/not take booleans; arithmetic takes numbers.
The program result must be a number. The booleans `success` and
`failure` and every observation variable are in scope.
"""

__all__ = [
    "BOOL", "BUILTINS", "NUM", "Binary", "Binding", "BoolLit", "Call",
    "CODES", "DEFAULT_R_MAX", "Diagnostic", "DslError", "EvalFault",
    "EvalResult", "Expr", "GRAMMAR_REFERENCE", "If", "Name", "NumLit",
    "ObsVariable", "ObservationSpec", "RewardProgram", "SourceSpan",
    "Unary", "evaluate", "extract_program", "parse", "pretty_print",
    "typecheck", "typecheck_strict",
]
