"""Spatial connection coefficients and the adapted-frame Levi-Civita table.

Frame order throughout is (temporal, spatial x3, vertical); spatial indices
in arrays are zero-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .kinematics import (
    KinematicSample,
    bracket_array,
    bracket_coefficients,
    kinematics_from_sample,
    raise_index,
)
from .metric import MetricSample, ThreadedMetric, sample_fields

__all__ = [
    "ConnectionSample",
    "LCRow",
    "ROW_NAMES",
    "bracket_coefficients",
    "compatibility_residual",
    "connection_sample",
    "frame_connection_from_christoffel",
    "levi_civita_table",
    "spatial_connection",
    "table_array",
    "torsion_residual",
]

# "X:Y" names the covariant derivative of Y along X
ROW_NAMES = (
    "d_beta:d_alpha",
    "d0:d_alpha",
    "d4:d_alpha",
    "d_alpha:d0",
    "d_alpha:d4",
    "d4:d0",
    "d0:d4",
    "d0:d0",
    "d4:d4",
)


@dataclass
class LCRow:
    """Decomposition of one covariant derivative in the adapted frame.

    ``spatial`` carries the coefficients of the three spatial frame fields on
    its last axis; ``temporal`` and ``vertical`` the other two. Leading axes
    index the free spatial frame fields (alpha, or beta then alpha).
    """

    spatial: np.ndarray
    temporal: np.ndarray
    vertical: np.ndarray

    def to_dict(self) -> dict:
        def plain(x):
            return x.tolist() if isinstance(x, np.ndarray) else float(x)

        return {"spatial": plain(self.spatial), "d0": plain(self.temporal), "d4": plain(self.vertical)}


@dataclass
class ConnectionSample:
    """Spatial connection coefficients at one point; the full Levi-Civita
    table is built on first access."""

    gamma_spatial: np.ndarray  # [gamma, alpha, beta]
    gamma_0: np.ndarray  # [gamma, alpha]
    gamma_4: np.ndarray  # [gamma, alpha]
    kinematics: KinematicSample
    sample: MetricSample = field(repr=False)

    @cached_property
    def lc_table(self) -> dict[str, LCRow]:
        return _table(self.sample, self.kinematics, self.gamma_spatial, self.gamma_0, self.gamma_4)


def _spatial_from(s: MetricSample, k: KinematicSample):
    Dh = s.dh @ s.frame.T  # Dh[a, b, i] = adapted derivative i of h_ab
    Dsp = Dh[:, :, 1:4]
    # Dsp[mu, alpha, beta] := delta_beta h_{mu alpha}
    lowered = (
        Dsp
        + np.transpose(Dsp, (0, 2, 1))
        - np.transpose(Dsp, (2, 0, 1))
    )
    gamma = 0.5 * np.einsum("gm,mab->gab", s.h_inv, lowered)
    Phi2, Psi2 = s.Phi.value**2, s.Psi.value**2
    gamma_0 = raise_index(s.h_inv, k.theta) + Phi2 * raise_index(s.h_inv, k.omega)
    gamma_4 = raise_index(s.h_inv, k.kappa) - Psi2 * raise_index(s.h_inv, k.eta)
    return gamma, gamma_0, gamma_4


def spatial_connection(m: ThreadedMetric, p: Sequence[float]):
    """``(gamma_spatial, gamma_0, gamma_4)`` of the Riemannian spatial connection.

    ``gamma_spatial[g, a, b]`` is the coefficient for differentiating spatial
    field a along spatial field b; ``gamma_0[g, a]`` and ``gamma_4[g, a]``
    along the temporal and vertical fields.
    """
    s = sample_fields(m, p)
    return _spatial_from(s, kinematics_from_sample(s))


def _table(s: MetricSample, k: KinematicSample, gamma, gamma_0, gamma_4) -> dict[str, LCRow]:
    Phi2, Psi2 = s.Phi.value**2, s.Psi.value**2
    h_inv = s.h_inv
    Phi_sp, Psi_sp = k.phi_log[1:], k.psi_log[1:]
    Phi0, Psi0 = k.phi_log[0], k.psi_log[0]
    mixed = 0.5 * raise_index(h_inv, Psi2 * k.a - Phi2 * k.d)
    # spatial blocks are indexed [alpha, gamma] or [beta, alpha, gamma]
    return {
        "d_beta:d_alpha": LCRow(
            np.transpose(gamma, (2, 1, 0)),
            (k.omega + k.theta / Phi2).T,
            (k.eta - k.kappa / Psi2).T,
        ),
        "d0:d_alpha": LCRow(gamma_0.T, Phi_sp - k.b, 0.5 * (Phi2 * k.d / Psi2 - k.a)),
        "d4:d_alpha": LCRow(gamma_4.T, 0.5 * (Psi2 * k.a / Phi2 - k.d), Psi_sp - k.c),
        "d_alpha:d0": LCRow(gamma_0.T, Phi_sp.copy(), 0.5 * (Phi2 * k.d / Psi2 + k.a)),
        "d_alpha:d4": LCRow(gamma_4.T, 0.5 * (Psi2 * k.a / Phi2 + k.d), Psi_sp.copy()),
        "d4:d0": LCRow(mixed, k.phi4, Psi0 - k.a0),
        "d0:d4": LCRow(mixed.copy(), k.phi4, Psi0),
        "d0:d0": LCRow(Phi2 * raise_index(h_inv, Phi_sp - k.b), Phi0, Phi2 * k.phi4 / Psi2),
        "d4:d4": LCRow(Psi2 * raise_index(h_inv, k.c - Psi_sp), Psi2 * (Psi0 - k.a0) / Phi2, k.psi4),
    }


def connection_from_sample(s: MetricSample) -> ConnectionSample:
    k = kinematics_from_sample(s)
    gamma, gamma_0, gamma_4 = _spatial_from(s, k)
    return ConnectionSample(gamma, gamma_0, gamma_4, k, s)


def connection_sample(m: ThreadedMetric, p: Sequence[float]) -> ConnectionSample:
    return connection_from_sample(sample_fields(m, p))


def levi_civita_table(m: ThreadedMetric, p: Sequence[float]) -> dict[str, LCRow]:
    """All nine covariant derivatives of adapted frame fields at ``p``."""
    return connection_sample(m, p).lc_table


def table_array(table: dict[str, LCRow]) -> np.ndarray:
    """Pack a table as ``C[i, j, l]``: the e_l component of the derivative of e_j along e_i."""
    C = np.zeros((5, 5, 5))

    def put(i, j, row: LCRow, idx=()):
        C[i, j, 1:4] = row.spatial[idx]
        C[i, j, 0] = np.asarray(row.temporal)[idx]
        C[i, j, 4] = np.asarray(row.vertical)[idx]

    for al in range(3):
        put(0, al + 1, table["d0:d_alpha"], (al,))
        put(4, al + 1, table["d4:d_alpha"], (al,))
        put(al + 1, 0, table["d_alpha:d0"], (al,))
        put(al + 1, 4, table["d_alpha:d4"], (al,))
        for be in range(3):
            put(be + 1, al + 1, table["d_beta:d_alpha"], (be, al))
    put(4, 0, table["d4:d0"])
    put(0, 4, table["d0:d4"])
    put(0, 0, table["d0:d0"])
    put(4, 4, table["d4:d4"])
    return C


def torsion_residual(m: ThreadedMetric, p: Sequence[float]) -> float:
    """max |nabla_X Y - nabla_Y X - [X, Y]| over all adapted frame pairs."""
    s = sample_fields(m, p)
    c = connection_from_sample(s)
    C = table_array(c.lc_table)
    br = bracket_array(s, c.kinematics)
    return float(np.max(np.abs(C - np.swapaxes(C, 0, 1) - br)))


def frame_metric_derivatives(s: MetricSample) -> np.ndarray:
    """``dG[j, k, i]``: adapted derivative i of the frame metric entry G_jk."""
    dG = np.zeros((5, 5, 5))
    dG[0, 0] = -2.0 * s.Phi.value * s.Phi.partials
    dG[1:4, 1:4] = s.dh
    dG[4, 4] = 2.0 * s.Psi.value * s.Psi.partials
    return dG @ s.frame.T


def compatibility_residual(m: ThreadedMetric, p: Sequence[float]) -> float:
    """max |X g(Y, Z) - g(nabla_X Y, Z) - g(Y, nabla_X Z)| over frame triples."""
    s = sample_fields(m, p)
    C = table_array(connection_from_sample(s).lc_table)
    G = s.frame_metric()
    lhs = np.transpose(frame_metric_derivatives(s), (2, 0, 1))  # [i, j, k]
    rhs = np.einsum("ijl,lk->ijk", C, G)
    rhs = rhs + np.transpose(rhs, (0, 2, 1))
    return float(np.max(np.abs(lhs - rhs)))


def frame_derivatives(s: MetricSample) -> np.ndarray:
    """``dE[i, a, b]``: coordinate partial b of component a of frame vector i."""
    dE = np.zeros((5, 5, 5))
    A0, dA0 = s.A_val[0], s.dA[0]
    dE[0, 4] = -dA0
    for al in range(3):
        dE[al + 1, 0] = -s.dB[al]
        dE[al + 1, 4] = s.dB[al] * A0 + s.B_val[al] * dA0 - s.dA[al + 1]
    return dE


def frame_connection_from_christoffel(s: MetricSample, christoffel: np.ndarray) -> np.ndarray:
    """Express coordinate Christoffel symbols ``G[a, b, c]`` in the adapted frame.

    Returns ``C[i, j, l]`` in the same layout as :func:`table_array`.
    """
    E = s.frame
    dE = frame_derivatives(s)
    W = np.einsum("ib,jab->ija", E, dE) + np.einsum("ib,abc,jc->ija", E, christoffel, E)
    return W @ np.linalg.inv(E)
