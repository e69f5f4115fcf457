"""Fixed-step RK4 and adaptive Runge-Kutta-Fehlberg 4(5)."""

from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

from .errors import IntegrationError

RHS = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(f: RHS, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(f: RHS, y0: np.ndarray, t0: float, t1: float, step: float) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, y)`` at every step, the last step shortened to land on ``t1``.

    Times are computed as ``t0 + n*step`` so they do not accumulate rounding.
    """
    n_steps = max(1, int(np.ceil((t1 - t0) / step - 1e-9)))
    y = np.asarray(y0, dtype=float)
    t = t0
    for n in range(1, n_steps + 1):
        t_next = t1 if n == n_steps else t0 + n * step
        y = rk4_step(f, t, y, t_next - t)
        t = t_next
        yield t, y


# Fehlberg tableau
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)


def rkf45(
    f: RHS,
    y0: np.ndarray,
    t0: float,
    t1: float,
    atol: float = 1e-9,
    rtol: float = 1e-9,
    h0: float | None = None,
    min_step: float = 1e-14,
) -> Iterator[tuple[float, np.ndarray]]:
    """Adaptive integration; yields accepted ``(t, y)`` pairs.

    The fourth-order solution is propagated; the embedded fifth-order one
    only drives step control. Raises :class:`IntegrationError` when the step
    collapses below ``min_step * max(1, |t|)``.
    """
    y = np.asarray(y0, dtype=float)
    t = t0
    h = h0 if h0 is not None else min(1e-2, (t1 - t0) / 10.0)
    while t < t1:
        h = min(h, t1 - t)
        k = []
        for c, row in zip(_C, _A):
            yi = y + h * sum((a * kj for a, kj in zip(row, k)), np.zeros_like(y))
            k.append(f(t + c * h, yi))
        y4 = y + h * sum(b * kj for b, kj in zip(_B4, k))
        y5 = y + h * sum(b * kj for b, kj in zip(_B5, k))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y4))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
        if err <= 1.0:
            t = t1 if t1 - (t + h) <= 1e-15 * max(1.0, abs(t1)) else t + h
            y = y4
            yield t, y
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if t < t1 and h < min_step * max(1.0, abs(t)):
            raise IntegrationError("rkf45 step size underflow", t)
