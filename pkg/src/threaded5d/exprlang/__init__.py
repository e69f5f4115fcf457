"""Metric-field expression language: parsing, printing, and jets."""

from .jet import JetValue, compile_jet, eval_jet
from .nodes import (
    CONSTANTS,
    FUNCTIONS,
    Add,
    BinOp,
    Call,
    Const,
    Div,
    Expr,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    is_literal,
    unparse,
    variables,
)
from .parser import parse, tokenize

__all__ = [
    "CONSTANTS",
    "FUNCTIONS",
    "Add",
    "BinOp",
    "Call",
    "Const",
    "Div",
    "Expr",
    "JetValue",
    "Mul",
    "Neg",
    "Num",
    "Pow",
    "Sub",
    "Var",
    "compile_jet",
    "eval_jet",
    "is_literal",
    "parse",
    "tokenize",
    "unparse",
    "variables",
]
