"""Geodesics: the threaded equations of motion and a coordinate oracle.

Two independent routes are provided. :func:`integrate` evolves the adapted
velocity components (u0, u1, u2, u3, u4) with the kinematic quantities and
the spatial connection; :func:`integrate_oracle` integrates the ordinary
geodesic equation with Christoffel symbols of the assembled 5x5 metric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ode
from .connection import ConnectionSample, connection_from_sample
from .errors import IntegrationError, NumericalError, SingularMetricError
from .kinematics import raise_index
from .metric import MetricSample, ThreadedMetric, adapted_norm_from_sample, assemble_from_sample, sample_fields

VARIANTS = ("derived", "as-printed")
INTEGRATORS = ("rk4", "rkf45")
CSV_HEADER = ("t", "x0", "x1", "x2", "x3", "x4", "u0", "u1", "u2", "u3", "u4", "norm")


@dataclass
class AdaptedVelocity:
    """Tangent components in the adapted frame (temporal, spatial, vertical)."""

    u0: float
    u_spatial: np.ndarray
    u4: float

    def __post_init__(self):
        self.u_spatial = np.asarray(self.u_spatial, dtype=float).reshape(3)

    def as_array(self) -> np.ndarray:
        return np.array([self.u0, *self.u_spatial, self.u4])

    @classmethod
    def from_array(cls, u: Sequence[float]) -> "AdaptedVelocity":
        return cls(float(u[0]), np.asarray(u[1:4], dtype=float), float(u[4]))


@dataclass
class GeodesicState:
    point: np.ndarray
    vel: AdaptedVelocity

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float).reshape(5)


@dataclass
class Trajectory:
    """Accepted integration steps: times ``t``, positions ``x``, adapted velocities ``u``.

    ``norm[n]`` is g(dx/dt, dx/dt) at step n.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    norm: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def state(self, n: int) -> GeodesicState:
        return GeodesicState(self.x[n], AdaptedVelocity.from_array(self.u[n]))

    @property
    def samples(self):
        return [(float(t), self.state(n), float(nm)) for n, (t, nm) in enumerate(zip(self.t, self.norm))]

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - self.norm[0])))


# --- velocity conversions -------------------------------------------------


def to_adapted_sample(s: MetricSample, v: Sequence[float]) -> np.ndarray:
    return s.coframe @ np.asarray(v, dtype=float)


def to_natural_sample(s: MetricSample, u: Sequence[float]) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.empty(5)
    v[1:4] = u[1:4]
    v[0] = u[0] - s.B_val @ u[1:4]
    v[4] = u[4] - s.A_val[0] * v[0] - s.A_val[1:] @ u[1:4]
    return v


def to_adapted(m: ThreadedMetric, p: Sequence[float], v: Sequence[float]) -> AdaptedVelocity:
    """Adapted components of the coordinate velocity ``v = dx/dt``."""
    return AdaptedVelocity.from_array(to_adapted_sample(sample_fields(m, p), v))


def to_natural(m: ThreadedMetric, p: Sequence[float], u) -> np.ndarray:
    """Inverse of :func:`to_adapted`; ``u`` may be an AdaptedVelocity or a 5-array."""
    if isinstance(u, AdaptedVelocity):
        u = u.as_array()
    return to_natural_sample(sample_fields(m, p), u)


# --- equations of motion --------------------------------------------------


def adapted_acceleration(
    s: MetricSample, conn: ConnectionSample, u: np.ndarray, variant: str = "derived"
) -> np.ndarray:
    """d/dt of (u0, u1, u2, u3, u4) along a geodesic.

    ``variant="as-printed"`` drops the 1/Phi^2 factor from the (u4)^2 term of
    the temporal equation. It is kept only so the two forms can be compared.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    k = conn.kinematics
    Phi2, Psi2 = s.Phi.value**2, s.Psi.value**2
    u0, us, u4 = u[0], u[1:4], u[4]
    Phi0, Phi_sp = k.phi_log[0], k.phi_log[1:]
    Psi0, Psi_sp = k.psi_log[0], k.psi_log[1:]
    h_inv = s.h_inv

    spatial = (
        np.einsum("gab,a,b->g", conn.gamma_spatial, us, us)
        + 2.0 * conn.gamma_0 @ us * u0
        + 2.0 * conn.gamma_4 @ us * u4
        + raise_index(h_inv, Psi2 * k.a - Phi2 * k.d) * u0 * u4
        + Phi2 * raise_index(h_inv, Phi_sp - k.b) * u0**2
        + Psi2 * raise_index(h_inv, k.c - Psi_sp) * u4**2
    )
    vert_coeff = Psi2 * (Psi0 - k.a0)
    if variant == "derived":
        vert_coeff /= Phi2
    temporal = (
        us @ k.theta @ us / Phi2
        + (2.0 * Phi_sp - k.b) @ us * u0
        + Psi2 / Phi2 * (k.a @ us) * u4
        + 2.0 * k.phi4 * u0 * u4
        + Phi0 * u0**2
        + vert_coeff * u4**2
    )
    vertical = (
        -(us @ k.kappa @ us) / Psi2
        + Phi2 / Psi2 * (k.d @ us) * u0
        + (2.0 * Psi_sp - k.c) @ us * u4
        + (2.0 * Psi0 - k.a0) * u0 * u4
        + Phi2 * k.phi4 / Psi2 * u0**2
        + k.psi4 * u4**2
    )
    return -np.array([temporal, *spatial, vertical])


def rhs_adapted(m: ThreadedMetric, state: GeodesicState, variant: str = "derived"):
    """``(dx/dt, du/dt)`` for the adapted system at ``state``."""
    s = sample_fields(m, state.point)
    u = state.vel.as_array()
    return to_natural_sample(s, u), adapted_acceleration(s, connection_from_sample(s), u, variant)


def natural_acceleration(s: MetricSample, u: np.ndarray, du: np.ndarray) -> np.ndarray:
    """Coordinate acceleration d^2x/dt^2 implied by adapted ``u`` and ``du/dt``."""
    v = to_natural_sample(s, u)
    a = np.empty(5)
    a[1:4] = du[1:4]
    a[0] = du[0] - (s.dB @ v) @ u[1:4] - s.B_val @ du[1:4]
    dA_dt = s.dA @ v
    a[4] = du[4] - dA_dt[0] * v[0] - s.A_val[0] * a[0] - dA_dt[1:] @ u[1:4] - s.A_val[1:] @ du[1:4]
    return a


def christoffel_from_sample(s: MetricSample) -> np.ndarray:
    full = assemble_from_sample(s)
    g, dg = full.value, full.partials
    try:
        if abs(np.linalg.det(g)) < 1e-300:
            raise np.linalg.LinAlgError
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise SingularMetricError(f"coordinate metric singular at {s.point.tolist()}") from None
    # dg[d, c, b] = partial_b g_dc
    lowered = np.transpose(dg, (0, 2, 1)) + dg - np.transpose(dg, (2, 0, 1))
    # lowered[d, b, c] = d_b g_dc + d_c g_bd - d_d g_bc
    return 0.5 * np.einsum("ad,dbc->abc", g_inv, lowered)


def christoffel_full(m: ThreadedMetric, p: Sequence[float]) -> np.ndarray:
    """Coordinate Christoffel symbols ``G[a, b, c]`` of the assembled metric."""
    return christoffel_from_sample(sample_fields(m, p))


def oracle_acceleration(m: ThreadedMetric, p: Sequence[float], v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return -np.einsum("abc,b,c->a", christoffel_full(m, p), v, v)


# --- integration ----------------------------------------------------------


def _run(stepper, rhs, y0, t_span, record, meta) -> Trajectory:
    t0, t1 = t_span
    ts, xs, us, norms = [], [], [], []

    def push(t, y):
        x, u, nm = record(y)
        ts.append(t)
        xs.append(x)
        us.append(u)
        norms.append(nm)

    push(t0, y0)
    try:
        for t, y in stepper(rhs, y0, t0, t1):
            if not np.isfinite(y).all():
                raise IntegrationError("non-finite state", ts[-1])
            push(t, y)
    except IntegrationError:
        raise
    except NumericalError as exc:
        raise IntegrationError(f"metric evaluation failed: {exc}", ts[-1]) from exc
    traj = Trajectory(np.array(ts), np.array(xs), np.array(us), np.array(norms), meta)
    traj.meta["max_norm_drift"] = traj.max_norm_drift
    return traj


def _stepper(integrator: str, step: float, tol: float):
    if integrator == "rk4":
        if not step > 0:
            raise ValueError("rk4 needs a positive step")
        return lambda f, y0, t0, t1: ode.rk4(f, y0, t0, t1, step)
    if integrator == "rkf45":
        return lambda f, y0, t0, t1: ode.rkf45(f, y0, t0, t1, atol=tol, rtol=tol)
    raise ValueError(f"unknown integrator {integrator!r}; expected one of {INTEGRATORS}")


def _check_span(t_span) -> tuple[float, float]:
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError(f"time span must be increasing, got {t_span!r}")
    return t0, t1


def integrate(
    m: ThreadedMetric,
    s0: GeodesicState,
    t_span: tuple[float, float] = (0.0, 1.0),
    integrator: str = "rk4",
    step: float = 1e-3,
    tol: float = 1e-9,
    variant: str = "derived",
) -> Trajectory:
    """Integrate the threaded equations of motion from ``s0``.

    The state is (x0..x4, u0..u4); positions advance with the coordinate
    velocity recovered from the adapted components at every stage.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    t_span = _check_span(t_span)

    def rhs(t, y):
        s = sample_fields(m, y[:5])
        u = y[5:]
        return np.concatenate(
            [to_natural_sample(s, u), adapted_acceleration(s, connection_from_sample(s), u, variant)]
        )

    def record(y):
        return y[:5].copy(), y[5:].copy(), adapted_norm_from_sample(sample_fields(m, y[:5]), y[5:])

    y0 = np.concatenate([s0.point, s0.vel.as_array()])
    meta = {"source": "integrate", "integrator": integrator, "variant": variant}
    meta.update({"step": step} if integrator == "rk4" else {"tol": tol})
    return _run(_stepper(integrator, step, tol), rhs, y0, t_span, record, meta)


def integrate_oracle(
    m: ThreadedMetric,
    s0: GeodesicState,
    t_span: tuple[float, float] = (0.0, 1.0),
    integrator: str = "rk4",
    step: float = 1e-3,
    tol: float = 1e-9,
) -> Trajectory:
    """Integrate d^2x/dt^2 + G[a,b,c] dx^b/dt dx^c/dt = 0 in coordinates.

    The recorded velocities are converted to adapted components so the
    result compares directly with :func:`integrate`; the norm is taken with
    the assembled coordinate metric.
    """
    t_span = _check_span(t_span)

    def rhs(t, y):
        s = sample_fields(m, y[:5])
        v = y[5:]
        return np.concatenate([v, -np.einsum("abc,b,c->a", christoffel_from_sample(s), v, v)])

    def record(y):
        s = sample_fields(m, y[:5])
        v = y[5:]
        g = assemble_from_sample(s).value
        return y[:5].copy(), to_adapted_sample(s, v), float(v @ g @ v)

    v0 = to_natural_sample(sample_fields(m, s0.point), s0.vel.as_array())
    y0 = np.concatenate([s0.point, v0])
    meta = {"source": "integrate_oracle", "integrator": integrator, "variant": "oracle"}
    meta.update({"step": step} if integrator == "rk4" else {"tol": tol})
    return _run(_stepper(integrator, step, tol), rhs, y0, t_span, record, meta)


def state_from_natural(m: ThreadedMetric, point: Sequence[float], v: Sequence[float]) -> GeodesicState:
    return GeodesicState(np.asarray(point, dtype=float), to_adapted(m, point, v))


# --- CSV ------------------------------------------------------------------


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def write_csv(traj: Trajectory, dest) -> None:
    """Write ``traj`` to a path or an open text file."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_csv(traj, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for n in range(len(traj)):
        row = [traj.t[n], *traj.x[n], *traj.u[n], traj.norm[n]]
        writer.writerow([fmt(v) for v in row])


def read_csv(path: str | Path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ValueError(f"trajectory CSV must start with header {','.join(CSV_HEADER)}")
        rows = np.array([[float(v) for v in row] for row in reader if row])
    if rows.size == 0:
        raise ValueError("trajectory CSV has no rows")
    if not np.all(np.diff(rows[:, 0]) > 0):
        raise ValueError("trajectory times must be strictly increasing")
    return Trajectory(rows[:, 0], rows[:, 1:6], rows[:, 6:11], rows[:, 11], {"source": "csv"})
