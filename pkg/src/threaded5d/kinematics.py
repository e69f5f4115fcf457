"""Adapted derivatives and the kinematic quantities of a threaded metric."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exprlang import JetValue, compile_jet
from .metric import MetricSample, ThreadedMetric, sample_fields


def adapted_derivative(s: MetricSample, field_jet: JetValue, index: int) -> float:
    """Derivative of a field along one adapted frame vector.

    ``index`` 0 is the temporal field d/dx0 - A0 d/dx4, 1..3 the spatial
    fields, 4 the vertical field d/dx4.
    """
    d = field_jet.partials
    if index == 4:
        return float(d[4])
    d0 = d[0] - s.A_val[0] * d[4]
    if index == 0:
        return float(d0)
    a = index - 1
    return float(d[index] - s.B_val[a] * d0 - s.A_val[index] * d[4])


def adapted_gradient(s: MetricSample, partials: np.ndarray) -> np.ndarray:
    """All five adapted derivatives at once.

    ``partials`` has the coordinate derivative on its last axis; the result
    has the frame index there instead.
    """
    return partials @ s.frame.T


@dataclass
class KinematicSample:
    """Kinematic quantities at one point; spatial indices are zero-based."""

    omega: np.ndarray  # 3x3 antisymmetric, 4D vorticity
    eta: np.ndarray  # 3x3 antisymmetric, 5D vorticity
    theta: np.ndarray  # 3x3 symmetric, 4D expansion tensor
    kappa: np.ndarray  # 3x3 symmetric, 5D expansion tensor
    theta_trace: float
    kappa_trace: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    a0: float
    phi_log: np.ndarray  # (Phi_0, Phi_1, Phi_2, Phi_3)
    phi4: float
    psi_log: np.ndarray
    psi4: float

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "eta": self.eta.tolist(),
            "Theta": self.theta.tolist(),
            "K": self.kappa.tolist(),
            "Theta_trace": self.theta_trace,
            "K_trace": self.kappa_trace,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "d": self.d.tolist(),
            "a0": self.a0,
            "Phi_i": self.phi_log.tolist(),
            "Phi4": self.phi4,
            "Psi_i": self.psi_log.tolist(),
            "Psi4": self.psi4,
        }


def _antisym(upper) -> np.ndarray:
    out = np.zeros((3, 3))
    for (i, j), v in upper.items():
        out[i, j] = v
        out[j, i] = -v
    return out


def kinematics_from_sample(s: MetricSample) -> KinematicSample:
    E = s.frame
    DA = s.dA @ E.T  # DA[i, k]: adapted derivative k of A_i
    DB = s.dB @ E.T
    Dh = s.dh @ E.T
    A0, B = s.A_val[0], s.B_val
    DA0 = DA[0]

    pairs = [(0, 1), (0, 2), (1, 2)]
    omega = _antisym({(i, j): 0.5 * (DB[j, i + 1] - DB[i, j + 1]) for i, j in pairs})
    eta = _antisym(
        {
            (i, j): 0.5
            * (
                DA[j + 1, i + 1]
                - DA[i + 1, j + 1]
                + B[i] * DA0[j + 1]
                - B[j] * DA0[i + 1]
            )
            for i, j in pairs
        }
    )
    theta = 0.5 * Dh[:, :, 0]
    kappa = 0.5 * Dh[:, :, 4]
    # Dh is built from symmetric jets, so theta/kappa are symmetric exactly

    a = DA[1:, 0] - DA0[1:4] - B * DA0[0]
    b = DB[:, 0]
    c = s.dA[1:, 4] - B * s.dA[0, 4]
    d = s.dB[:, 4]

    phi_grad = E @ s.Phi.partials
    psi_grad = E @ s.Psi.partials
    return KinematicSample(
        omega=omega,
        eta=eta,
        theta=theta,
        kappa=kappa,
        theta_trace=float(np.sum(theta * s.h_inv)),
        kappa_trace=float(np.sum(kappa * s.h_inv)),
        a=a,
        b=b,
        c=c,
        d=d,
        a0=float(s.dA[0, 4]),
        phi_log=phi_grad[:4] / s.Phi.value,
        phi4=float(phi_grad[4] / s.Phi.value),
        psi_log=psi_grad[:4] / s.Psi.value,
        psi4=float(psi_grad[4] / s.Psi.value),
    )


def kinematic_sample(m: ThreadedMetric, p: Sequence[float]) -> KinematicSample:
    return kinematics_from_sample(sample_fields(m, p))


def raise_index(h_inv: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Raise the first index: ``out[g, a] = h^{g m} T[m, a]``.

    A 3-vector argument is treated as a covector and raised the same way.
    """
    return h_inv @ T


def lower_index(h: np.ndarray, T: np.ndarray) -> np.ndarray:
    return h @ T


def bracket_array(s: MetricSample, k: KinematicSample) -> np.ndarray:
    """Lie brackets of the adapted frame: ``[e_i, e_j] = br[i, j, l] e_l``.

    Frame order is (temporal, spatial x3, vertical). No bracket has a spatial
    component.
    """
    br = np.zeros((5, 5, 5))
    for al in range(3):
        i = al + 1
        br[i, 0, 0], br[i, 0, 4] = k.b[al], k.a[al]
        br[i, 4, 0], br[i, 4, 4] = k.d[al], k.c[al]
        br[0, i] = -br[i, 0]
        br[4, i] = -br[i, 4]
        for be in range(3):
            # [e_beta, e_alpha] = 2 omega_{alpha beta} e_0 + 2 eta_{alpha beta} e_4
            br[be + 1, i, 0] = 2.0 * k.omega[al, be]
            br[be + 1, i, 4] = 2.0 * k.eta[al, be]
    br[0, 4, 4] = k.a0
    br[4, 0, 4] = -k.a0
    return br


def bracket_coefficients(m: ThreadedMetric, p: Sequence[float]) -> dict:
    """Coefficients of the four adapted-frame bracket families.

    Keys: ``a, b, c, d`` (3-vectors), ``a0``, ``omega``, ``eta`` (3x3) and
    ``array`` (the full ``bracket_array``).
    """
    s = sample_fields(m, p)
    k = kinematics_from_sample(s)
    return {
        "a": k.a,
        "b": k.b,
        "c": k.c,
        "d": k.d,
        "a0": k.a0,
        "omega": k.omega,
        "eta": k.eta,
        "array": bracket_array(s, k),
    }


BRACKET_FAMILIES = {
    "[d_alpha,d0]": [(al, 0) for al in (1, 2, 3)],
    "[d0,d4]": [(0, 4)],
    "[d_alpha,d4]": [(al, 4) for al in (1, 2, 3)],
    "[d_beta,d_alpha]": [(be, al) for be in (1, 2, 3) for al in (1, 2, 3) if be != al],
}


def commutator_errors(m: ThreadedMetric, p: Sequence[float], F, step: float) -> dict[str, float]:
    """Max error of each bracket family applied to a test scalar ``F``.

    ``X(Y F)`` is approximated by a central difference of the jet-exact
    function ``Y F`` along the straight line through ``p`` in direction
    ``X(p)``. The error is therefore O(step^2).
    """
    fn = compile_jet(F)
    p = np.asarray(p, dtype=float)
    s = sample_fields(m, p)
    k = kinematics_from_sample(s)
    br = bracket_array(s, k)
    E = s.frame
    grad_p = E @ fn(p).partials

    def frame_derivative(q, j):
        return (sample_fields(m, q).frame @ fn(q).partials)[j]

    def along(i, j):
        x = E[i] * step
        return (frame_derivative(p + x, j) - frame_derivative(p - x, j)) / (2.0 * step)

    errors = {}
    for name, pairs in BRACKET_FAMILIES.items():
        worst = 0.0
        for i, j in pairs:
            lhs = along(i, j) - along(j, i)
            rhs = br[i, j] @ grad_p
            worst = max(worst, abs(lhs - rhs))
        errors[name] = worst
    return errors


def _rate(coarse: float, fine: float) -> float:
    if fine == 0.0:
        return math.inf
    if coarse == 0.0:
        return -math.inf
    return math.log2(coarse / fine)


def commutator_convergence(
    m: ThreadedMetric, p: Sequence[float], F, step: float = 0.02, levels: int = 3
) -> tuple[list[dict[str, float]], dict[str, float]]:
    """Errors at ``step, step/2, ...`` and the worst observed order per family."""
    steps = [step / 2**n for n in range(levels)]
    errs = [commutator_errors(m, p, F, h) for h in steps]
    orders = {}
    for name in BRACKET_FAMILIES:
        rates = [_rate(e0[name], e1[name]) for e0, e1 in zip(errs, errs[1:])]
        orders[name] = float(min(rates))
    return errs, orders
