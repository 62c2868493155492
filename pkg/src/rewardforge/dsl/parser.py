"""Recursive-descent parser for the reward expression language.

Grammar (comments run from '#' to end of line, whitespace insignificant):

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
    power     ::= atom ( "^" unary )?            (right-associative)
    atom      ::= NUMBER | IDENT | "true" | "false" | call | "(" expr ")"
    call      ::= FUNC "(" expr ("," expr)* ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    BUILTINS, KEYWORDS, Binary, Binding, BoolLit, Call, Expr, If, Name,
    NumLit, RewardProgram, Unary,
)
from .diagnostics import Diagnostic, DslError, SourceSpan

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|[<>+\-*/^()=,;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "ident" | keyword | operator text | "eof"
    text: str
    span: SourceSpan


def _lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            span = SourceSpan(line, col, line, col)
            raise DslError([Diagnostic(
                "error", "PARSE_UNEXPECTED_TOKEN",
                f"unexpected character {source[pos]!r}", span,
            )])
        text = m.group(0)
        end_line, end_col = line, col
        for ch in text[:-1] if text else "":
            if ch == "\n":
                end_line += 1
                end_col = 1
            else:
                end_col += 1
        span = SourceSpan(line, col, end_line, end_col)
        kind = m.lastgroup
        if kind == "ident":
            kind = text if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, span))
        elif kind == "op":
            tokens.append(Token(text, text, span))
        elif kind == "number":
            tokens.append(Token("number", text, span))
        # whitespace and comments are dropped
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, col, line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, message: str, code: str = "PARSE_UNEXPECTED_TOKEN",
              span: SourceSpan | None = None) -> "DslError":
        if self.cur.kind == "eof" and code == "PARSE_UNEXPECTED_TOKEN":
            code = "PARSE_UNTERMINATED"
        return DslError([Diagnostic("error", code, message, span or self.cur.span)])

    def _expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            got = self.cur.text or "end of input"
            raise self._fail(f"expected {kind!r}, found {got!r}")
        tok = self.cur
        self.i += 1
        return tok

    def program(self) -> RewardProgram:
        bindings: list[Binding] = []
        while self.cur.kind == "let":
            self.i += 1
            name_tok = self._expect("ident")
            self._expect("=")
            expr = self.expr()
            self._expect(";")
            bindings.append(Binding(name_tok.text, expr, name_tok.span))
        if self.cur.kind != "return":
            got = self.cur.text or "end of input"
            raise self._fail(f"expected 'let' or 'return', found {got!r}")
        self.i += 1
        result = self.expr()
        self._expect(";")
        if self.cur.kind != "eof":
            raise self._fail(f"unexpected trailing input {self.cur.text!r}")
        return RewardProgram(bindings, result, self.source)

    def expr(self) -> Expr:
        if self.cur.kind == "if":
            start = self.cur.span
            self.i += 1
            cond = self.expr()
            self._expect("then")
            then = self.expr()
            self._expect("else")
            orelse = self.expr()
            return If(cond, then, orelse, span=start.merge(orelse.span))
        return self.or_expr()

    def _binop_chain(self, sub, ops) -> Expr:
        left = sub()
        while self.cur.kind in ops:
            op = self.cur.kind
            self.i += 1
            right = sub()
            left = Binary(op, left, right, span=left.span.merge(right.span))
        return left

    def or_expr(self) -> Expr:
        return self._binop_chain(self.and_expr, ("or",))

    def and_expr(self) -> Expr:
        return self._binop_chain(self.not_expr, ("and",))

    def not_expr(self) -> Expr:
        if self.cur.kind == "not":
            start = self.cur.span
            self.i += 1
            operand = self.not_expr()
            return Unary("not", operand, span=start.merge(operand.span))
        return self.cmp_expr()

    def cmp_expr(self) -> Expr:
        left = self.add_expr()
        if self.cur.kind in ("<", "<=", ">", ">=", "==", "!="):
            op = self.cur.kind
            self.i += 1
            right = self.add_expr()
            return Binary(op, left, right, span=left.span.merge(right.span))
        return left

    def add_expr(self) -> Expr:
        return self._binop_chain(self.mul_expr, ("+", "-"))

    def mul_expr(self) -> Expr:
        return self._binop_chain(self.unary, ("*", "/"))

    def unary(self) -> Expr:
        if self.cur.kind == "-":
            start = self.cur.span
            self.i += 1
            operand = self.unary()
            return Unary("-", operand, span=start.merge(operand.span))
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.cur.kind == "^":
            self.i += 1
            exponent = self.unary()
            return Binary("^", base, exponent, span=base.span.merge(exponent.span))
        return base

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self.i += 1
            return NumLit(float(tok.text), span=tok.span)
        if tok.kind == "true":
            self.i += 1
            return BoolLit(True, span=tok.span)
        if tok.kind == "false":
            self.i += 1
            return BoolLit(False, span=tok.span)
        if tok.kind == "ident":
            if tok.text in BUILTINS and self.tokens[self.i + 1].kind == "(":
                return self.call()
            self.i += 1
            return Name(tok.text, span=tok.span)
        if tok.kind == "(":
            self.i += 1
            inner = self.expr()
            self._expect(")")
            return inner
        got = tok.text or "end of input"
        raise self._fail(f"expected an expression, found {got!r}")

    def call(self) -> Expr:
        func_tok = self._expect("ident")
        func = func_tok.text
        self._expect("(")
        args = [self.expr()]
        while self.cur.kind == ",":
            self.i += 1
            args.append(self.expr())
        close = self._expect(")")
        span = func_tok.span.merge(close.span)
        arity = BUILTINS[func]
        if len(args) != arity:
            raise DslError([Diagnostic(
                "error", "PARSE_ARITY",
                f"{func} takes {arity} argument{'s' if arity != 1 else ''}, got {len(args)}",
                span,
            )])
        return Call(func, args, span=span)


def parse(source: str) -> RewardProgram:
    """Parse source text into an untyped program.

    Raises DslError carrying >=1 diagnostic on the first offending token.
    """
    return _Parser(_lex(source), source).program()
