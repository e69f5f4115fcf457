"""Threaded 5D metrics: field expressions, point samples, full coordinate metric.

The line element is written in the adapted coframe,

    ds^2 = -Phi^2 (dx0 + B_a dx^a)^2 + h_ab dx^a dx^b + Psi^2 (dx4 + A_i dx^i)^2,

with spatial indices a, b in 1..3 and i in 0..3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DomainError, MetricSignatureError, MissingFieldError
from .exprlang import Expr, JetValue, Mul, Num, Pow, compile_jet, is_literal, parse, unparse, variables

FAMILIES = ("minkowski5", "rw5", "custom")
H_NAMES = ("h11", "h12", "h13", "h22", "h23", "h33")
G_NAMES = ("g11", "g12", "g13", "g22", "g23", "g33")
CUSTOM_FIELDS = ("Phi", "Psi", "A0", "A1", "A2", "A3", "B1", "B2", "B3") + H_NAMES
# (row, col) of each packed symmetric entry
SYM_INDEX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))

POSITIVITY_TOL = 1e-12


@dataclass(frozen=True)
class ThreadedMetric:
    """The field expressions defining a threaded line element.

    ``h`` (and ``g`` for the rw5 family) hold the six independent entries of a
    symmetric 3x3 matrix in the order 11, 12, 13, 22, 23, 33.
    """

    family: str
    Phi: Expr
    Psi: Expr
    A: tuple[Expr, ...]
    B: tuple[Expr, ...]
    h: tuple[Expr, ...]
    f: Expr | None = None
    g: tuple[Expr, ...] | None = None
    _jets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.A) != 4 or len(self.B) != 3 or len(self.h) != 6:
            raise ConfigError("metric needs 4 A, 3 B and 6 h expressions")
        exprs = (self.Phi, self.Psi, *self.A, *self.B, *self.h)
        object.__setattr__(self, "_jets", tuple((e, compile_jet(e)) for e in exprs))

    def field_expressions(self) -> dict[str, Expr]:
        return dict(zip(CUSTOM_FIELDS, (self.Phi, self.Psi, *self.A, *self.B, *self.h)))

    def h_expr(self, a: int, b: int) -> Expr:
        """Entry h_ab for zero-based spatial indices."""
        key = (min(a, b), max(a, b))
        return self.h[SYM_INDEX.index(key)]


@dataclass
class MetricSample:
    """All fields of a metric and their first partials at one point."""

    point: np.ndarray
    Phi: JetValue
    Psi: JetValue
    A: tuple[JetValue, ...]
    B: tuple[JetValue, ...]
    h: tuple[tuple[JetValue, ...], ...]
    h_inv: np.ndarray

    def __post_init__(self):
        self.A_val = np.array([j.value for j in self.A])
        self.dA = np.array([j.partials for j in self.A])
        self.B_val = np.array([j.value for j in self.B])
        self.dB = np.array([j.partials for j in self.B])
        self.h_val = np.array([[j.value for j in row] for row in self.h])
        self.dh = np.array([[j.partials for j in row] for row in self.h])

    @property
    def frame(self) -> np.ndarray:
        """Coordinate components of the adapted frame, one row per vector.

        Rows are d/dx0 - A0 d/dx4, then the three spatial frame fields, then
        d/dx4.
        """
        A0 = self.A_val[0]
        E = np.eye(5)
        E[0, 4] = -A0
        for a in range(3):
            E[a + 1, 0] = -self.B_val[a]
            E[a + 1, 4] = self.B_val[a] * A0 - self.A_val[a + 1]
        return E

    @property
    def coframe(self) -> np.ndarray:
        """Rows are the adapted coframe 1-forms in coordinate components."""
        L = np.eye(5)
        L[0, 1:4] = self.B_val
        L[4, 0:4] = self.A_val
        return L

    def frame_metric(self) -> np.ndarray:
        """Metric components in the adapted frame: diag(-Phi^2, h, Psi^2)."""
        G = np.zeros((5, 5))
        G[0, 0] = -self.Phi.value**2
        G[1:4, 1:4] = self.h_val
        G[4, 4] = self.Psi.value**2
        return G


def _field(fields: Mapping[str, object], name: str, family: str) -> Expr:
    if name not in fields:
        raise MissingFieldError(name, family)
    value = fields[name]
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Num(float(value))
    return value  # already an Expr


def _warp(f: Expr, g: Expr) -> Expr:
    if is_literal(g, 0.0):
        return Num(0.0)
    f2 = Pow(f, Num(2.0))
    return f2 if is_literal(g, 1.0) else Mul(f2, g)


def build_metric(config: Mapping) -> ThreadedMetric:
    """Build a metric from a ``{"family": ..., "fields": {...}}`` mapping.

    Field values may be expression strings, numbers or parsed expressions.
    For ``rw5`` the entries of ``g`` default to the identity.
    """
    family = config.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown metric family {family!r}; expected one of {FAMILIES}")
    fields = config.get("fields") or {}
    one, zero = Num(1.0), Num(0.0)
    if family == "minkowski5":
        return ThreadedMetric(
            family, one, one, (zero,) * 4, (zero,) * 3, (one, zero, zero, one, zero, one)
        )
    if family == "custom":
        exprs = [_field(fields, name, family) for name in CUSTOM_FIELDS]
        return ThreadedMetric(family, exprs[0], exprs[1], tuple(exprs[2:6]), tuple(exprs[6:9]), tuple(exprs[9:]))

    f = _field(fields, "f", family)
    if not variables(f) <= {0, 4}:
        raise ConfigError(f"rw5 warping function must depend only on x0, x4: {unparse(f)!r}")
    g = []
    for name, (r, c) in zip(G_NAMES, SYM_INDEX):
        ge = _field(fields, name, family) if name in fields else (one if r == c else zero)
        if variables(ge) & {0, 4}:
            raise ConfigError(f"rw5 field {name} may depend only on x1..x3: {unparse(ge)!r}")
        g.append(ge)
    h = tuple(_warp(f, ge) for ge in g)
    return ThreadedMetric(family, one, one, (zero,) * 4, (zero,) * 3, h, f=f, g=tuple(g))


def _invert3(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse by adjugate over determinant, and the determinant itself."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    cof = np.array(
        [
            [e * i - f * h, c * h - b * i, b * f - c * e],
            [f * g - d * i, a * i - c * g, c * d - a * f],
            [d * h - e * g, b * g - a * h, a * e - b * d],
        ]
    )
    det = a * cof[0, 0] + b * cof[1, 0] + c * cof[2, 0]
    return (cof / det if det != 0.0 else np.full((3, 3), np.nan)), float(det)


def sample_fields(m: ThreadedMetric, p: Sequence[float]) -> MetricSample:
    """Evaluate every field of ``m`` with its jets at ``p`` and validate them.

    Raises :class:`MetricSignatureError` if Phi or Psi is not positive or h is
    not positive definite, :class:`DomainError` if an expression is undefined.
    """
    point = np.asarray(p, dtype=float)
    if point.shape != (5,) or not np.isfinite(point).all():
        raise ValueError(f"point must have 5 finite coordinates, got {p!r}")
    jets = [fn(point) for _, fn in m._jets]
    values = np.array([j.value for j in jets])
    partials = np.array([j.partials for j in jets])
    if not (np.isfinite(values).all() and np.isfinite(partials).all()):
        for (expr, _), j in zip(m._jets, jets):
            if not (np.isfinite(j.value) and np.isfinite(j.partials).all()):
                raise DomainError("non-finite value", unparse(expr))
    Phi, Psi = jets[0], jets[1]
    if Phi.value <= POSITIVITY_TOL:
        raise MetricSignatureError(f"Phi = {Phi.value!r} is not positive at {point.tolist()}")
    if Psi.value <= POSITIVITY_TOL:
        raise MetricSignatureError(f"Psi = {Psi.value!r} is not positive at {point.tolist()}")
    packed = jets[9:]
    h = [[None] * 3 for _ in range(3)]
    for j, (r, c) in zip(packed, SYM_INDEX):
        h[r][c] = h[c][r] = j
    hv = np.array([[x.value for x in row] for row in h])
    h_inv, det = _invert3(hv)
    minors = (hv[0, 0], hv[0, 0] * hv[1, 1] - hv[0, 1] ** 2, det)
    for k, minor in enumerate(minors, start=1):
        if minor <= POSITIVITY_TOL:
            raise MetricSignatureError(
                f"spatial metric h not positive definite at {point.tolist()}: "
                f"leading minor {k} = {minor!r}"
            )
    return MetricSample(
        point=point,
        Phi=Phi,
        Psi=Psi,
        A=tuple(jets[2:6]),
        B=tuple(jets[6:9]),
        h=tuple(tuple(row) for row in h),
        h_inv=h_inv,
    )


@dataclass(frozen=True)
class FullMetric:
    """Coordinate metric g_ab with partials: ``partials[a, b, c] = d_c g_ab``."""

    value: np.ndarray
    partials: np.ndarray


def assemble_from_sample(s: MetricSample) -> FullMetric:
    Phi2 = s.Phi * s.Phi
    Psi2 = s.Psi * s.Psi
    A, B, h = s.A, s.B, s.h
    g = [[None] * 5 for _ in range(5)]
    g[0][0] = -Phi2 + Psi2 * A[0] * A[0]
    g[0][4] = Psi2 * A[0]
    g[4][4] = Psi2
    for a in range(3):
        g[0][a + 1] = -Phi2 * B[a] + Psi2 * A[0] * A[a + 1]
        g[a + 1][4] = Psi2 * A[a + 1]
        for b in range(a, 3):
            g[a + 1][b + 1] = h[a][b] - Phi2 * B[a] * B[b] + Psi2 * A[a + 1] * A[b + 1]
    for r in range(5):
        for c in range(r):
            g[r][c] = g[c][r]
    return FullMetric(
        value=np.array([[j.value for j in row] for row in g]),
        partials=np.array([[j.partials for j in row] for row in g]),
    )


def assemble_full_metric(m: ThreadedMetric, p: Sequence[float]) -> FullMetric:
    """The 5x5 coordinate metric (signature -++++) and its first partials."""
    return assemble_from_sample(sample_fields(m, p))


def adapted_norm_from_sample(s: MetricSample, u: Sequence[float]) -> float:
    u = np.asarray(u, dtype=float)
    us = u[1:4]
    return float(
        -(s.Phi.value**2) * u[0] ** 2 + us @ s.h_val @ us + s.Psi.value**2 * u[4] ** 2
    )


def adapted_norm(m: ThreadedMetric, p: Sequence[float], u: Sequence[float]) -> float:
    """g(u, u) for ``u = (u0, u1, u2, u3, u4)`` given in the adapted frame."""
    return adapted_norm_from_sample(sample_fields(m, p), u)


def minkowski5() -> ThreadedMetric:
    return build_metric({"family": "minkowski5"})
