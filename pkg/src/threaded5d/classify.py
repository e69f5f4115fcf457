"""Special classes of curves: spatial, autoparallel, temporal and vertical geodesics.

Field conditions are certified on finite sampling grids; the expressions are
treated as black boxes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import ode
from .connection import connection_from_sample
from .errors import DomainError, NumericalError
from .exprlang import Expr, compile_jet, unparse, variables
from .geodesic import Trajectory, adapted_acceleration, to_adapted_sample
from .kinematics import kinematics_from_sample
from .metric import ThreadedMetric, adapted_norm_from_sample, sample_fields

DEFAULT_TOL = 1e-8
_RHS_SOURCES = ("integrate", "integrate_oracle", "temporal_geodesic", "vertical_geodesic")


@dataclass
class ClassificationReport:
    """Verdict per criterion; each is true iff its residual is within its tolerance."""

    verdicts: dict[str, bool] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    samples: int = 0
    notes: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, tol: float, precondition: bool = True) -> bool:
        ok = bool(precondition and residual <= tol)
        self.verdicts[name] = ok
        self.residuals[name] = float(residual)
        self.tolerances[name] = float(tol)
        return ok

    def to_dict(self) -> dict:
        return {
            "verdicts": self.verdicts,
            "residuals": self.residuals,
            "tolerances": self.tolerances,
            "samples": self.samples,
            **({"notes": self.notes} if self.notes else {}),
        }


@dataclass
class Box:
    """Axis-aligned box in the five coordinates."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float).reshape(5)
        self.hi = np.asarray(self.hi, dtype=float).reshape(5)
        if np.any(self.hi < self.lo):
            raise ValueError("box upper corner below lower corner")

    def nodes(self, grid: Sequence[int]):
        if len(grid) != 5 or any(int(n) < 1 for n in grid):
            raise ValueError(f"grid needs five positive counts, got {grid!r}")
        axes = [
            np.linspace(lo, hi, int(n)) if n > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi, n in zip(self.lo, self.hi, grid)
        ]
        for node in itertools.product(*axes):
            yield np.array(node)


# --- spatial curves -------------------------------------------------------


def speed_scale(traj: Trajectory) -> float:
    return float(np.max(np.linalg.norm(traj.u[:, 1:4], axis=1)))


def spatial_curve_residual(traj: Trajectory) -> float:
    return float(np.max(np.abs(traj.u[:, [0, 4]])))


def is_spatial_curve(traj: Trajectory, tol: float = DEFAULT_TOL) -> bool:
    """Tangent to the spatial distribution at every sample: |u0|, |u4| small."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    return spatial_curve_residual(traj) <= tol * (1.0 + speed_scale(traj))


def _uniform_step(t: np.ndarray) -> float:
    dt = np.diff(t)
    h = float(np.mean(dt))
    if np.max(np.abs(dt - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("finite-difference residuals need a uniform time grid")
    return h


def curve_accelerations(m: ThreadedMetric, traj: Trajectory, method: str = "auto"):
    """Spatial accelerations d^2x/dt^2 and the sample indices they belong to.

    ``method="rhs"`` evaluates the equations of motion at each sample (valid
    for trajectories produced by the integrators here); ``"fd"`` uses
    fourth-order central differences of the positions on interior samples.
    """
    if method == "auto":
        method = "rhs" if traj.meta.get("source") in _RHS_SOURCES else "fd"
    if method == "rhs":
        acc = []
        for x, u in zip(traj.x, traj.u):
            s = sample_fields(m, x)
            acc.append(adapted_acceleration(s, connection_from_sample(s), u)[1:4])
        return np.array(acc), np.arange(len(traj))
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    if len(traj) < 5:
        raise ValueError("need at least 5 samples for finite differences")
    h = _uniform_step(traj.t)
    x = traj.x[:, 1:4]
    acc = (-x[4:] + 16.0 * x[3:-1] - 30.0 * x[2:-2] + 16.0 * x[1:-3] - x[:-4]) / (12.0 * h * h)
    return acc, np.arange(2, len(traj) - 2)


def spatial_geodesic_residuals(m: ThreadedMetric, traj: Trajectory, method: str = "auto"):
    """Max residuals along the curve of: the autoparallel equation, the
    4D expansion quadratic form and the 5D expansion quadratic form."""
    acc, idx = curve_accelerations(m, traj, method)
    res_a = res_b = res_c = 0.0
    for a, n in zip(acc, idx):
        s = sample_fields(m, traj.x[n])
        conn = connection_from_sample(s)
        us = traj.u[n, 1:4]
        k = conn.kinematics
        res_a = max(res_a, float(np.max(np.abs(a + np.einsum("gab,a,b->g", conn.gamma_spatial, us, us)))))
        res_b = max(res_b, abs(float(us @ k.theta @ us)))
        res_c = max(res_c, abs(float(us @ k.kappa @ us)))
    return res_a, res_b, res_c


def autoparallel_residual(m: ThreadedMetric, traj: Trajectory, method: str = "auto") -> float:
    return spatial_geodesic_residuals(m, traj, method)[0]


def classify_curve(
    m: ThreadedMetric, traj: Trajectory, tol: float = DEFAULT_TOL, method: str = "auto"
) -> ClassificationReport:
    """Spatial-curve, autoparallel and spatial-geodesic verdicts for a trajectory.

    Tolerances scale with the speed: ``tol*(1+V)`` for the spatial-curve test
    and ``tol*(1+V^2)`` for the quadratic residuals, V the largest spatial
    speed along the curve.
    """
    scale = speed_scale(traj)
    report = ClassificationReport(samples=len(traj))
    spatial = report.add("spatial_curve", spatial_curve_residual(traj), tol * (1.0 + scale))
    res_a, res_b, res_c = spatial_geodesic_residuals(m, traj, method)
    qtol = tol * (1.0 + scale**2)
    auto = report.add("autoparallel", res_a, qtol, spatial)
    b_ok = report.add("theta_form_vanishes", res_b, qtol)
    c_ok = report.add("kappa_form_vanishes", res_c, qtol)
    report.add("spatial_geodesic", max(res_a, res_b, res_c), qtol, spatial and auto and b_ok and c_ok)
    report.notes["speed_scale"] = scale
    return report


# --- Killing vector bundle ------------------------------------------------


@dataclass
class KillingReport:
    verdict: bool
    max_theta: float
    max_kappa: float
    nodes: int
    tolerance: float


def killing_bundle_check(m: ThreadedMetric, region: Box, grid: Sequence[int], tol: float = DEFAULT_TOL) -> KillingReport:
    """Whether both expansion tensors vanish at every grid node of ``region``."""
    max_theta = max_kappa = 0.0
    count = 0
    for node in region.nodes(grid):
        k = kinematics_from_sample(sample_fields(m, node))
        max_theta = max(max_theta, float(np.max(np.abs(k.theta))))
        max_kappa = max(max_kappa, float(np.max(np.abs(k.kappa))))
        count += 1
    return KillingReport(max_theta <= tol and max_kappa <= tol, max_theta, max_kappa, count, tol)


# --- temporal and vertical geodesics --------------------------------------


@dataclass
class ConstructionReport:
    """Outcome of checking the field conditions and building the curve."""

    verdict: bool
    conditions: dict[str, dict]
    trajectory: Trajectory | None
    tolerance: float

    def failed(self) -> list[str]:
        return [name for name, c in self.conditions.items() if not c["ok"]]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "tolerance": self.tolerance, "conditions": self.conditions}


def _certify(m, nodes, tol, checks):
    worst = {name: (0.0, None) for name in checks}
    for node in nodes:
        s = sample_fields(m, node)
        k = kinematics_from_sample(s)
        for name, fn in checks.items():
            r = float(np.max(np.abs(fn(k))))
            if r > worst[name][0] or worst[name][1] is None:
                worst[name] = (r, node.tolist())
    return {
        name: {"max_residual": r, "worst_point": where, "ok": r <= tol}
        for name, (r, where) in worst.items()
    }


def _merge(a: dict, b: dict, tol: float) -> dict:
    out = {}
    for name in a:
        pick = a[name] if a[name]["max_residual"] >= b[name]["max_residual"] else b[name]
        out[name] = dict(pick, ok=pick["max_residual"] <= tol)
    return out


def _build_trajectory(m, positions, velocities, t, source) -> Trajectory:
    xs, us, norms = [], [], []
    for x, v in zip(positions, velocities):
        s = sample_fields(m, x)
        u = to_adapted_sample(s, v)
        xs.append(x)
        us.append(u)
        norms.append(adapted_norm_from_sample(s, u))
    traj = Trajectory(np.array(t), np.array(xs), np.array(us), np.array(norms), {"source": source})
    traj.meta["max_norm_drift"] = traj.max_norm_drift
    return traj


def _solve(rhs, y0, t_span, step):
    t0, t1 = map(float, t_span)
    ts, ys = [t0], [np.asarray(y0, dtype=float)]
    for t, y in ode.rk4(rhs, ys[0], t0, t1, step):
        ts.append(t)
        ys.append(y)
    return ts, ys


TEMPORAL_CONDITIONS = {
    "phi4_vanishes": lambda k: k.phi4,
    "phi_spatial_equals_b": lambda k: k.phi_log[1:] - k.b,
}
VERTICAL_CONDITIONS = {
    "psi0_equals_a0": lambda k: k.psi_log[0] - k.a0,
    "psi_spatial_equals_c": lambda k: k.psi_log[1:] - k.c,
}


def temporal_geodesic(
    m: ThreadedMetric,
    region: Box,
    grid: Sequence[int],
    initial: Sequence[float],
    rate: float = 1.0,
    t_span: tuple[float, float] = (0.0, 1.0),
    tol: float = DEFAULT_TOL,
    step: float = 1e-3,
) -> ConstructionReport:
    """Certify the temporal-geodesic field conditions and build the curve.

    The conditions (Phi_4 = 0 and Phi_alpha = b_alpha) are checked on the grid
    and again along the constructed curve. If they hold, the curve starting
    at ``initial`` with dx0/dt = ``rate`` keeps x1..x3 fixed and solves
    x0'' + Phi_0 (x0')^2 = 0, x4' = -A0 x0'.
    """
    point = np.asarray(initial, dtype=float).reshape(5)
    conditions = _certify(m, region.nodes(grid), tol, TEMPORAL_CONDITIONS)
    if not all(c["ok"] for c in conditions.values()):
        return ConstructionReport(False, conditions, None, tol)

    def position(y):
        x = point.copy()
        x[0], x[4] = y[0], y[2]
        return x

    def rhs(t, y):
        s = sample_fields(m, position(y))
        phi0 = kinematics_from_sample(s).phi_log[0]
        return np.array([y[1], -phi0 * y[1] ** 2, -s.A_val[0] * y[1]])

    ts, ys = _solve(rhs, [point[0], rate, point[4]], t_span, step)
    positions = [position(y) for y in ys]
    velocities = []
    for x, y in zip(positions, ys):
        v = np.zeros(5)
        v[0] = y[1]
        v[4] = -sample_fields(m, x).A_val[0] * y[1]
        velocities.append(v)
    traj = _build_trajectory(m, positions, velocities, ts, "temporal_geodesic")
    conditions = _merge(conditions, _certify(m, positions, tol, TEMPORAL_CONDITIONS), tol)
    verdict = all(c["ok"] for c in conditions.values())
    return ConstructionReport(verdict, conditions, traj, tol)


def vertical_geodesic(
    m: ThreadedMetric,
    region: Box,
    grid: Sequence[int],
    initial: Sequence[float],
    rate: float = 1.0,
    t_span: tuple[float, float] = (0.0, 1.0),
    tol: float = DEFAULT_TOL,
    step: float = 1e-3,
) -> ConstructionReport:
    """Vertical counterpart of :func:`temporal_geodesic`.

    Conditions: Psi_0 = a0 and Psi_alpha = c_alpha. The curve keeps x0..x3
    fixed and solves x4'' + Psi_4 (x4')^2 = 0 with x4'(0) = ``rate``.
    """
    point = np.asarray(initial, dtype=float).reshape(5)
    conditions = _certify(m, region.nodes(grid), tol, VERTICAL_CONDITIONS)
    if not all(c["ok"] for c in conditions.values()):
        return ConstructionReport(False, conditions, None, tol)

    def position(y):
        x = point.copy()
        x[4] = y[0]
        return x

    def rhs(t, y):
        psi4 = kinematics_from_sample(sample_fields(m, position(y))).psi4
        return np.array([y[1], -psi4 * y[1] ** 2])

    ts, ys = _solve(rhs, [point[4], rate], t_span, step)
    positions = [position(y) for y in ys]
    velocities = [np.array([0.0, 0.0, 0.0, 0.0, y[1]]) for y in ys]
    traj = _build_trajectory(m, positions, velocities, ts, "vertical_geodesic")
    conditions = _merge(conditions, _certify(m, positions, tol, VERTICAL_CONDITIONS), tol)
    verdict = all(c["ok"] for c in conditions.values())
    return ConstructionReport(verdict, conditions, traj, tol)


# --- critical points of the warping function ------------------------------


class CriticalPoint(NamedTuple):
    c: float  # x0
    k: float  # x4
    residual: float  # |grad f| at (c, k)


def rw_critical_points(
    f: Expr,
    domain: Sequence[Sequence[float]],
    grid: Sequence[int] = (41, 41),
    tol: float = 1e-10,
    max_iter: int = 50,
    fd_step: float = 1e-5,
) -> list[CriticalPoint]:
    """Critical points of a warping function f(x0, x4) inside ``domain``.

    ``domain`` is ``((x0_lo, x0_hi), (x4_lo, x4_hi))``. Grid nodes where |grad f|
    is a local minimum seed a Newton iteration on grad f; the Jacobian is a
    central difference of the exact gradient.
    """
    if isinstance(f, str):
        from .exprlang import parse

        f = parse(f)
    if not variables(f) <= {0, 4}:
        raise ValueError(f"warping function must depend only on x0, x4: {unparse(f)!r}")
    fn = compile_jet(f)
    (c_lo, c_hi), (k_lo, k_hi) = domain
    margin = 1e-9 * max(1.0, c_hi - c_lo, k_hi - k_lo)

    def grad(q):
        d = fn((q[0], 0.0, 0.0, 0.0, q[1])).partials
        return np.array([d[0], d[4]])

    cs = np.linspace(c_lo, c_hi, grid[0])
    ks = np.linspace(k_lo, k_hi, grid[1])
    mag = np.full((len(cs), len(ks)), np.inf)
    for i, c in enumerate(cs):
        for j, k in enumerate(ks):
            try:
                mag[i, j] = np.linalg.norm(grad((c, k)))
            except (DomainError, ZeroDivisionError):
                pass

    seeds = []
    for i in range(len(cs)):
        for j in range(len(ks)):
            if not np.isfinite(mag[i, j]):
                continue
            window = mag[max(i - 1, 0) : i + 2, max(j - 1, 0) : j + 2]
            if mag[i, j] <= window.min():
                seeds.append(np.array([cs[i], ks[j]]))

    found: list[CriticalPoint] = []
    for q in seeds:
        try:
            for _ in range(max_iter):
                gq = grad(q)
                if np.linalg.norm(gq) <= tol:
                    break
                J = np.empty((2, 2))
                for col in range(2):
                    e = np.zeros(2)
                    e[col] = fd_step
                    J[:, col] = (grad(q + e) - grad(q - e)) / (2.0 * fd_step)
                q = q - np.linalg.solve(J, gq)
            res = float(np.linalg.norm(grad(q)))
        except (NumericalError, np.linalg.LinAlgError, ZeroDivisionError):
            continue
        inside = c_lo - margin <= q[0] <= c_hi + margin and k_lo - margin <= q[1] <= k_hi + margin
        if res <= tol and inside and all(np.hypot(q[0] - p.c, q[1] - p.k) > 1e-6 for p in found):
            found.append(CriticalPoint(float(q[0]), float(q[1]), res))
    return sorted(found)
