"""Immutable expression trees and their text form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "abs")
CONSTANTS = ("pi", "e")
N_VARS = 5


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if not 0 <= self.index < N_VARS:
            raise ValueError(f"variable index {self.index} outside x0..x4")


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Const, Var, Neg, BinOp, Call]


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


def Pow(a, b):
    return BinOp("^", a, b)


_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _BINARY_PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(text: str, cond: bool) -> str:
    return f"({text})" if cond else text


def unparse(e: Expr) -> str:
    """Render ``e`` with the minimal parentheses that re-parse to the same tree."""
    if isinstance(e, Num):
        v = float(e.value)
        text = str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)
        return f"({text})" if e.value < 0 else text
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.func}({unparse(e.arg)})"
    if isinstance(e, Neg):
        # operand of unary minus is parsed at unary level
        return "-" + _wrap(unparse(e.operand), _prec(e.operand) < _NEG_PREC)
    if isinstance(e, BinOp):
        p = _BINARY_PREC[e.op]
        if e.op == "^":
            left = _wrap(unparse(e.left), _prec(e.left) <= p)
            right = _wrap(unparse(e.right), _prec(e.right) < _NEG_PREC)
            return f"{left}^{right}"
        left = _wrap(unparse(e.left), _prec(e.left) < p)
        right = _wrap(unparse(e.right), _prec(e.right) <= p)
        if e.op in "+-":
            return f"{left} {e.op} {right}"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expr) -> frozenset[int]:
    """Indices of the coordinates that ``e`` mentions."""
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Call):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return frozenset()


def is_literal(e: Expr, value: float) -> bool:
    return isinstance(e, Num) and e.value == value
