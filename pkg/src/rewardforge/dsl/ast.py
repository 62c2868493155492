"""Abstract syntax of the reward expression language.

Equality on nodes is structural: spans and inferred type tags are
excluded from comparison so a parsed tree compares equal to a
synthesized one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import SourceSpan

NUM = "Num"
BOOL = "Bool"

# builtin name -> arity
BUILTINS = {
    "abs": 1, "min": 2, "max": 2, "exp": 1, "log": 1, "sqrt": 1,
    "tanh": 1, "sin": 1, "cos": 1, "sign": 1, "clamp": 3,
}

RESERVED = frozenset({"success", "failure"})

KEYWORDS = frozenset({
    "let", "return", "if", "then", "else", "or", "and", "not", "true", "false",
})


@dataclass
class Expr:
    span: SourceSpan | None = field(default=None, kw_only=True, compare=False)
    ty: str | None = field(default=None, kw_only=True, compare=False)


@dataclass
class NumLit(Expr):
    value: float = 0.0


@dataclass
class BoolLit(Expr):
    value: bool = False


@dataclass
class Name(Expr):
    ident: str = ""


@dataclass
class Unary(Expr):
    op: str = "-"  # "-" | "not"
    operand: Expr = None  # type: ignore[assignment]


@dataclass
class Binary(Expr):
    op: str = "+"  # + - * / ^ < <= > >= == != and or
    left: Expr = None  # type: ignore[assignment]
    right: Expr = None  # type: ignore[assignment]


@dataclass
class Call(Expr):
    func: str = ""
    args: list[Expr] = field(default_factory=list)


@dataclass
class If(Expr):
    cond: Expr = None  # type: ignore[assignment]
    then: Expr = None  # type: ignore[assignment]
    orelse: Expr = None  # type: ignore[assignment]


@dataclass
class Binding:
    name: str
    expr: Expr
    name_span: SourceSpan | None = field(default=None, compare=False)


@dataclass
class RewardProgram:
    bindings: list[Binding]
    result: Expr
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class ObsVariable:
    name: str
    low: float
    high: float
    unit: str
    description: str


@dataclass(frozen=True)
class ObservationSpec:
    variables: tuple[ObsVariable, ...]

    def __post_init__(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate observation variable names")
        for v in self.variables:
            if not v.low < v.high:
                raise ValueError(f"variable {v.name}: low must be < high")
            if not _valid_ident(v.name):
                raise ValueError(f"variable {v.name!r} is not a valid identifier")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]


def _valid_ident(name: str) -> bool:
    return (
        name.isidentifier()
        and name not in KEYWORDS
        and name not in RESERVED
        and name not in BUILTINS
    )
