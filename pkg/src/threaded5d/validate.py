"""Cross-check battery run by ``threaded5d validate``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .connection import (
    compatibility_residual,
    connection_from_sample,
    frame_connection_from_christoffel,
    table_array,
    torsion_residual,
)
from .exprlang import parse
from .geodesic import VARIANTS, GeodesicState, christoffel_from_sample, integrate, integrate_oracle
from .kinematics import commutator_convergence
from .metric import ThreadedMetric, sample_fields

ORACLE_TOL = 1e-6
NORM_DRIFT_TOL = 1e-8
IDENTITY_TOL = 1e-9
TABLE_ORACLE_TOL = 1e-8
MIN_ORDER = 1.9
EXACT_FLOOR = 1e-10
TEST_SCALAR = "sin(x0 + 2*x1 - x4)*exp(0.3*x2) + cos(x3*x4 + x0)"


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    required: bool = True
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "passed": self.passed,
            "required": self.required,
            "detail": self.detail,
        }


@dataclass
class ValidationResult:
    checks: list[Check]
    matching_variants: list[str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def table(self) -> str:
        lines = [f"{'check':<40} {'value':>12} {'threshold':>12}  result"]
        for c in self.checks:
            status = "PASS" if c.passed else ("FAIL" if c.required else "mismatch")
            if not c.required and c.passed:
                status = "match"
            lines.append(f"{c.name:<40} {c.value:>12.3e} {c.threshold:>12.1e}  {status}  {c.detail}".rstrip())
        lines.append(f"oracle-consistent variant(s): {', '.join(self.matching_variants) or 'none'}")
        lines.append("OVERALL: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "matching_variants": self.matching_variants,
            "checks": [c.to_dict() for c in self.checks],
        }


def run_battery(
    m: ThreadedMetric,
    state: GeodesicState,
    points: Sequence[Sequence[float]],
    t_span=(0.0, 1.0),
    step: float = 1e-3,
) -> ValidationResult:
    checks: list[Check] = []
    oracle = integrate_oracle(m, state, t_span, step=step)
    n0 = abs(oracle.norm[0])
    matching = []
    for variant in VARIANTS:
        traj = integrate(m, state, t_span, step=step, variant=variant)
        err = float(np.max(np.abs(traj.x[-1] - oracle.x[-1])))
        ok = err <= ORACLE_TOL
        if ok:
            matching.append(variant)
        checks.append(
            Check(f"oracle equivalence [{variant}]", err, ORACLE_TOL, ok, required=variant == "derived")
        )
        if variant == "derived":
            drift = traj.max_norm_drift
            bound = NORM_DRIFT_TOL * (1.0 + n0)
            checks.append(Check("norm drift [derived]", drift, bound, drift <= bound))
    drift = oracle.max_norm_drift
    bound = NORM_DRIFT_TOL * (1.0 + n0)
    checks.append(Check("norm drift [oracle]", drift, bound, drift <= bound))

    torsion = max(torsion_residual(m, p) for p in points)
    checks.append(Check("torsion-free table", torsion, IDENTITY_TOL, torsion <= IDENTITY_TOL))
    compat = max(compatibility_residual(m, p) for p in points)
    checks.append(Check("metric-compatible table", compat, IDENTITY_TOL, compat <= IDENTITY_TOL))
    table_err = 0.0
    for p in points:
        s = sample_fields(m, p)
        C = table_array(connection_from_sample(s).lc_table)
        table_err = max(table_err, float(np.max(np.abs(C - frame_connection_from_christoffel(s, christoffel_from_sample(s))))))
    checks.append(Check("table vs coordinate Christoffels", table_err, TABLE_ORACLE_TOL, table_err <= TABLE_ORACLE_TOL))

    F = parse(TEST_SCALAR)
    for p in points:
        errs, orders = commutator_convergence(m, p, F)
        for name, order in orders.items():
            finest = errs[-1][name]
            ok = order >= MIN_ORDER or finest <= EXACT_FLOOR
            checks.append(
                Check(
                    f"commutator order {name}",
                    order,
                    MIN_ORDER,
                    ok,
                    detail=f"at {_short(p)}, error {finest:.2e}" + (" (exact)" if finest <= EXACT_FLOOR else ""),
                )
            )
    return ValidationResult(checks, matching)


def _short(p) -> str:
    return "(" + ",".join(f"{v:.3g}" for v in p) + ")"


def default_points(center: Sequence[float], count: int = 3, radius: float = 0.1, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    return [center] + [center + rng.uniform(-radius, radius, 5) for _ in range(count - 1)]
