"""First-order forward-mode differentiation in the five coordinates."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError
from .nodes import N_VARS, BinOp, Call, Const, Expr, Neg, Num, Var, unparse, variables

_ZERO = np.zeros(N_VARS)
_ZERO.flags.writeable = False
_BASIS = np.eye(N_VARS)
_BASIS.flags.writeable = False


class JetValue:
    """A value together with its five first partial derivatives.

    ``partials[a]`` is the derivative with respect to ``x<a>``. Instances are
    treated as immutable; arithmetic always allocates.
    """

    __slots__ = ("value", "partials")

    def __init__(self, value: float, partials: np.ndarray = _ZERO):
        self.value = float(value)
        self.partials = partials

    @classmethod
    def constant(cls, value: float) -> "JetValue":
        return cls(value, _ZERO)

    @classmethod
    def variable(cls, value: float, index: int) -> "JetValue":
        return cls(value, _BASIS[index])

    def __repr__(self) -> str:
        return f"JetValue({self.value!r}, {self.partials.tolist()!r})"

    def _coerce(self, other) -> "JetValue":
        return other if isinstance(other, JetValue) else JetValue(other)

    def __add__(self, other):
        other = self._coerce(other)
        return JetValue(self.value + other.value, self.partials + other.partials)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return JetValue(self.value - other.value, self.partials - other.partials)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return JetValue(-self.value, -self.partials)

    def __mul__(self, other):
        if not isinstance(other, JetValue):
            return JetValue(self.value * other, self.partials * other)
        return JetValue(
            self.value * other.value,
            self.partials * other.value + other.partials * self.value,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.value == 0.0:
            raise ZeroDivisionError("division by zero")
        q = self.value / other.value
        return JetValue(q, (self.partials - other.partials * q) / other.value)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def scale_chain(self, value: float, slope: float) -> "JetValue":
        """Apply an outer function with the given value and derivative."""
        return JetValue(value, self.partials * slope)

    def is_constant(self) -> bool:
        return not self.partials.any()


def _fail(node: Expr, message: str) -> DomainError:
    return DomainError(message, unparse(node))


def _apply(func: str, x: JetValue, node: Expr) -> JetValue:
    v = x.value
    try:
        if func == "sin":
            return x.scale_chain(math.sin(v), math.cos(v))
        if func == "cos":
            return x.scale_chain(math.cos(v), -math.sin(v))
        if func == "tan":
            c = math.cos(v)
            if c == 0.0:
                raise _fail(node, "tan at a pole")
            return x.scale_chain(math.tan(v), 1.0 / (c * c))
        if func == "exp":
            ev = math.exp(v)
            return x.scale_chain(ev, ev)
        if func == "log":
            if v <= 0.0:
                raise _fail(node, f"log of non-positive value {v!r}")
            return x.scale_chain(math.log(v), 1.0 / v)
        if func == "sqrt":
            if v < 0.0:
                raise _fail(node, f"sqrt of negative value {v!r}")
            if v == 0.0:
                if not x.is_constant():
                    raise _fail(node, "sqrt not differentiable at 0")
                return JetValue.constant(0.0)
            s = math.sqrt(v)
            return x.scale_chain(s, 0.5 / s)
        if func == "sinh":
            return x.scale_chain(math.sinh(v), math.cosh(v))
        if func == "cosh":
            return x.scale_chain(math.cosh(v), math.sinh(v))
        if func == "tanh":
            t = math.tanh(v)
            return x.scale_chain(t, 1.0 - t * t)
        if func == "abs":
            if v == 0.0 and not x.is_constant():
                raise _fail(node, "abs not differentiable at 0")
            return x.scale_chain(abs(v), math.copysign(1.0, v) if v else 0.0)
    except OverflowError:
        raise _fail(node, f"overflow in {func}") from None
    raise ValueError(f"unknown function {func!r}")


def _power(base: JetValue, expo: JetValue, node: Expr) -> JetValue:
    b = base.value
    if expo.is_constant() and float(expo.value).is_integer():
        n = int(expo.value)
        if n == 0:
            return JetValue.constant(1.0)
        if b == 0.0 and n < 0:
            raise _fail(node, "zero raised to a negative power")
        try:
            return base.scale_chain(b**n, n * b ** (n - 1))
        except (OverflowError, ZeroDivisionError):
            raise _fail(node, "overflow in power") from None
    if b <= 0.0:
        raise _fail(node, f"non-integer power of non-positive base {b!r}")
    try:
        value = b**expo.value
    except OverflowError:
        raise _fail(node, "overflow in power") from None
    log_b = math.log(b)
    return JetValue(
        value, value * (expo.partials * log_b + base.partials * (expo.value / b))
    )


JetFunction = Callable[[Sequence[float]], JetValue]


def _constant_value(e: Expr) -> float | None:
    """Value of a variable-free subtree, or None if it is not constant."""
    if variables(e):
        return None
    try:
        jet = compile_jet(e, fold=False)(_ZERO)
    except (DomainError, ZeroDivisionError):
        return None  # report the failure at evaluation time instead
    return jet.value if math.isfinite(jet.value) else None


def compile_jet(e: Expr, fold: bool = True) -> JetFunction:
    """Turn ``e`` into a reusable callable ``point -> JetValue``.

    With ``fold`` set, variable-free subtrees are evaluated once and products
    or sums with a constant operand skip the general product rule.
    """
    if fold and not isinstance(e, (Num, Const, Var)):
        c = _constant_value(e)
        if c is not None:
            const = JetValue.constant(c)
            return lambda p: const
    if isinstance(e, Num):
        const = JetValue.constant(e.value)
        return lambda p: const
    if isinstance(e, Const):
        const = JetValue.constant(math.pi if e.name == "pi" else math.e)
        return lambda p: const
    if isinstance(e, Var):
        i = e.index
        return lambda p: JetValue(p[i], _BASIS[i])
    if isinstance(e, Neg):
        inner = compile_jet(e.operand, fold)
        return lambda p: -inner(p)
    if isinstance(e, Call):
        inner = compile_jet(e.arg, fold)
        func = e.func
        return lambda p: _apply(func, inner(p), e)
    if isinstance(e, BinOp):
        left, right = compile_jet(e.left, fold), compile_jet(e.right, fold)
        cl = _constant_value(e.left) if fold else None
        cr = _constant_value(e.right) if fold else None
        if e.op == "+":
            if cl is not None:
                return lambda p: _shift(right(p), cl)
            if cr is not None:
                return lambda p: _shift(left(p), cr)
            return lambda p: left(p) + right(p)
        if e.op == "-":
            if cr is not None:
                return lambda p: _shift(left(p), -cr)
            return lambda p: left(p) - right(p)
        if e.op == "*":
            if cl is not None:
                return lambda p: _scale(right(p), cl)
            if cr is not None:
                return lambda p: _scale(left(p), cr)
            return lambda p: left(p) * right(p)
        if e.op == "^":
            return lambda p: _power(left(p), right(p), e)
        if e.op == "/":

            def divide(p):
                den = right(p)
                if den.value == 0.0:
                    raise _fail(e, "division by zero")
                return left(p) / den

            return divide
    raise TypeError(f"not an expression node: {e!r}")


def _shift(j: JetValue, c: float) -> JetValue:
    return JetValue(j.value + c, j.partials)


def _scale(j: JetValue, c: float) -> JetValue:
    return JetValue(j.value * c, j.partials * c)


def eval_jet(e: Expr, p: Sequence[float]) -> JetValue:
    """Value and all five first partials of ``e`` at ``p``.

    Derivatives come from the chain rule, so they are exact up to rounding.
    Raises :class:`DomainError` naming the offending subexpression.
    """
    if len(p) != N_VARS:
        raise ValueError(f"expected a point with {N_VARS} coordinates, got {len(p)}")
    jet = compile_jet(e)(p)
    if not (math.isfinite(jet.value) and np.isfinite(jet.partials).all()):
        raise DomainError("non-finite result", unparse(e))
    return jet
