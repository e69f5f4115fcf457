"""Recursive-descent parser for metric-field expressions.

Grammar (EBNF)::

    expr   = term , { ("+" | "-") , term } ;
    term   = unary , { ("*" | "/") , unary } ;
    unary  = "-" , unary | power ;
    power  = atom , [ "^" , unary ] ;            (* right-associative *)
    atom   = number | variable | constant
           | function , "(" , expr , ")"
           | "(" , expr , ")" ;
    variable = "x0" | "x1" | "x2" | "x3" | "x4" ;
    constant = "pi" | "e" ;
    function = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
             | "sinh" | "cosh" | "tanh" | "abs" ;
    number   = digits [ "." digits ] [ exponent ] | "." digits [ exponent ] ;
"""

from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import ParseError, UnknownIdentifierError
from .nodes import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Expr, Neg, Num, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)
_VAR_RE = re.compile(r"x([0-4])")


class Token(NamedTuple):
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", byte_pos)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), byte_pos))
        byte_pos += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(Token("end", "", byte_pos))
    return tokens


_ATOM_START = ("number", "variable", "constant", "function", "(", "-")


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            raise ParseError(f"unexpected {self._describe(self.tok)}", self.tok.offset, (text,))
        self.advance()

    @staticmethod
    def _describe(t: Token) -> str:
        return "end of input" if t.kind == "end" else f"token {t.text!r}"

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(
                f"unexpected {self._describe(self.tok)}",
                self.tok.offset,
                ("+", "-", "*", "/", "^", "end of input"),
            )
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            m = _VAR_RE.fullmatch(t.text)
            if m:
                return Var(int(m.group(1)))
            if t.text in CONSTANTS:
                return Const(t.text)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            raise UnknownIdentifierError(t.text, t.offset)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {self._describe(t)}", t.offset, _ATOM_START)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises :class:`ParseError` (with byte offset and expected tokens) or
    :class:`UnknownIdentifierError`.
    """
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0, _ATOM_START)
    return _Parser(source).parse()
