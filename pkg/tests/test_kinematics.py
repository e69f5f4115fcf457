import numpy as np
import pytest

from generators import custom, frame_fd, random_metric, random_points
from threaded5d.exprlang import eval_jet, parse
from threaded5d.kinematics import (
    BRACKET_FAMILIES,
    adapted_derivative,
    adapted_gradient,
    bracket_array,
    bracket_coefficients,
    commutator_convergence,
    kinematic_sample,
    kinematics_from_sample,
    lower_index,
    raise_index,
)
from threaded5d.metric import build_metric, sample_fields


# --- adapted derivatives --------------------------------------------------


def test_adapted_equals_partial_without_potentials(rw_bilinear):
    p = (2, 0.1, 0.2, 0.3, 3)
    s = sample_fields(rw_bilinear, p)
    jet = eval_jet(parse("x0*x1 + x4^2*x3"), p)
    for i in range(5):
        assert adapted_derivative(s, jet, i) == jet.partials[i]


def test_temporal_derivative_hand_value():
    m = custom(A0="x1")
    p = (0, 2, 0, 0, 0)
    s = sample_fields(m, p)
    assert adapted_derivative(s, eval_jet(parse("x4"), p), 0) == -2.0


def test_spatial_derivative_hand_value():
    m = custom(B1="x2")
    p = (0, 0, 3, 0, 0)
    s = sample_fields(m, p)
    assert adapted_derivative(s, eval_jet(parse("x0"), p), 1) == -3.0


def test_gradient_agrees_with_single_derivatives(generic):
    p = (0.3, 0.2, -0.4, 0.5, 0.7)
    s = sample_fields(generic, p)
    jet = eval_jet(parse("sin(x0*x3) + x1*x4 - x2^2"), p)
    grad = adapted_gradient(s, jet.partials)
    np.testing.assert_allclose(grad, [adapted_derivative(s, jet, i) for i in range(5)], atol=1e-15)


# --- kinematic samples ----------------------------------------------------


def test_minkowski_everything_zero(mink):
    k = kinematic_sample(mink, (1, 2, 3, 4, 5))
    for name, value in k.to_dict().items():
        assert not np.any(value), name


def test_rw5_bilinear_expansion(rw_bilinear):
    k = kinematic_sample(rw_bilinear, (2, 0, 0, 0, 3))
    np.testing.assert_allclose(k.theta, 18 * np.eye(3), rtol=1e-15)
    np.testing.assert_allclose(k.kappa, 12 * np.eye(3), rtol=1e-15)
    assert k.theta_trace == pytest.approx(1.5, rel=1e-15)
    assert k.kappa_trace == pytest.approx(1.0, rel=1e-15)
    for arr in (k.omega, k.eta, k.a, k.b, k.c, k.d, k.phi_log, k.psi_log):
        assert not arr.any()
    assert k.a0 == k.phi4 == k.psi4 == 0.0


def test_rw5_theta_matches_half_difference_of_h(rw_bilinear):
    p = np.array([2.0, 0, 0, 0, 3])
    step = 1e-5
    e0 = np.array([step, 0, 0, 0, 0])
    dh = (sample_fields(rw_bilinear, p + e0).h_val - sample_fields(rw_bilinear, p - e0).h_val) / (2 * step)
    np.testing.assert_allclose(kinematic_sample(rw_bilinear, p).theta, 0.5 * dh, atol=1e-7)


def test_vorticity_hand_values():
    m = custom(B1="x2", B2="x3", A0="x1", A1="x2")
    k = kinematic_sample(m, (0, 0, 0, 1, 0))
    assert k.omega[0, 1] == pytest.approx(-0.5, abs=1e-15)
    assert k.eta[0, 1] == pytest.approx(-1.0, abs=1e-15)
    assert k.omega[1, 0] == pytest.approx(0.5, abs=1e-15)


def _kinematics_oracle(m, p):
    """Evaluate the vorticity, expansion and anholonomy formulas with every
    adapted derivative replaced by a central difference along the frame."""
    s = sample_fields(m, p)
    D = frame_fd(
        m,
        lambda q: np.concatenate(
            [q.A_val, q.B_val, q.h_val.ravel(), [q.Phi.value, q.Psi.value]]
        ),
        p,
    )
    DA, DB, Dh = D[:, 0:4], D[:, 4:7], D[:, 7:16].reshape(5, 3, 3)
    DPhi, DPsi = D[:, 16], D[:, 17]
    B = s.B_val
    omega, eta = np.zeros((3, 3)), np.zeros((3, 3))
    for al in range(3):
        for be in range(3):
            omega[al, be] = 0.5 * (DB[al + 1, be] - DB[be + 1, al])
            eta[al, be] = 0.5 * (
                DA[al + 1, be + 1] - DA[be + 1, al + 1] + B[al] * DA[be + 1, 0] - B[be] * DA[al + 1, 0]
            )
    a = np.array([DA[0, al + 1] - DA[al + 1, 0] - B[al] * DA[0, 0] for al in range(3)])
    b = np.array([DB[0, al] for al in range(3)])
    c = np.array([DA[4, al + 1] - B[al] * DA[4, 0] for al in range(3)])
    d = np.array([DB[4, al] for al in range(3)])
    return {
        "omega": omega,
        "eta": eta,
        "theta": 0.5 * Dh[0],
        "kappa": 0.5 * Dh[4],
        "a": a,
        "b": b,
        "c": c,
        "d": d,
        "a0": DA[4, 0],
        "phi_log": DPhi[:4] / s.Phi.value,
        "phi4": DPhi[4] / s.Phi.value,
        "psi_log": DPsi[:4] / s.Psi.value,
        "psi4": DPsi[4] / s.Psi.value,
    }


@pytest.mark.parametrize("seed", range(4))
def test_kinematics_match_finite_difference_oracle(seed):
    m = random_metric(seed)
    for p in random_points(seed + 50, 3, 0.8):
        k = kinematic_sample(m, p)
        for name, expected in _kinematics_oracle(m, p).items():
            np.testing.assert_allclose(getattr(k, name), expected, atol=1e-8, err_msg=name)


def test_vorticity_example_matches_oracle():
    m = custom(B1="x2", B2="x3", A0="x1", A1="x2")
    ref = _kinematics_oracle(m, (0, 0, 0, 1, 0))
    assert ref["omega"][0, 1] == pytest.approx(-0.5, abs=1e-8)
    assert ref["eta"][0, 1] == pytest.approx(-1.0, abs=1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_symmetries_and_traces(seed):
    m = random_metric(seed)
    for p in random_points(seed, 5):
        s = sample_fields(m, p)
        k = kinematics_from_sample(s)
        assert np.max(np.abs(k.omega + k.omega.T)) <= 1e-14
        assert np.max(np.abs(k.eta + k.eta.T)) <= 1e-14
        assert np.max(np.abs(k.theta - k.theta.T)) <= 1e-14
        assert np.max(np.abs(k.kappa - k.kappa.T)) <= 1e-14
        assert k.theta_trace == pytest.approx(np.trace(raise_index(s.h_inv, k.theta)), abs=1e-13)
        assert k.kappa_trace == pytest.approx(np.trace(raise_index(s.h_inv, k.kappa)), abs=1e-13)


def test_rw5_integrable_on_grid():
    m = build_metric({"family": "rw5", "fields": {"f": "2 + sin(x0)*cos(x4)", "g22": "1 + x1^2", "g13": "0.2*x2"}})
    for p in random_points(9, 20):
        k = kinematic_sample(m, p)
        for arr in (k.omega, k.eta, k.a, k.b, k.c, k.d):
            assert not arr.any()


# --- index gymnastics -----------------------------------------------------


def test_raise_zero():
    assert not raise_index(np.eye(3), np.zeros((3, 3))).any()


def test_raise_warped_expansion():
    np.testing.assert_allclose(raise_index(np.eye(3) / 36, 18 * np.eye(3)), 0.5 * np.eye(3), rtol=1e-15)


def test_raise_convention_contracts_first_index():
    h_inv = np.diag([1.0, 2.0, 4.0])
    T = np.arange(9.0).reshape(3, 3)
    # out[g, a] = h^{g m} T[m, a]
    np.testing.assert_array_equal(raise_index(h_inv, T), np.diag([1, 2, 4]) @ T)
    np.testing.assert_array_equal(raise_index(h_inv, np.ones(3)), [1, 2, 4])


def test_raise_then_lower(generic):
    s = sample_fields(generic, (0.1, 0.2, 0.3, 0.4, 0.5))
    T = np.random.default_rng(0).normal(size=(3, 3))
    np.testing.assert_allclose(lower_index(s.h_val, raise_index(s.h_inv, T)), T, rtol=1e-12, atol=1e-14)


# --- brackets -------------------------------------------------------------


def _bracket_oracle(m, p, step=1e-6):
    """Coordinate Lie brackets [e_i, e_j]^c = e_i(e_j^c) - e_j(e_i^c) expanded in the frame."""
    s = sample_fields(m, p)
    E = s.frame
    p = np.asarray(p, dtype=float)
    dE = np.empty((5, 5, 5))  # dE[a, i, c] = d_a E[i, c]
    for a in range(5):
        e = np.zeros(5)
        e[a] = step
        dE[a] = (sample_fields(m, p + e).frame - sample_fields(m, p - e).frame) / (2 * step)
    br = np.empty((5, 5, 5))
    Einv = np.linalg.inv(E)
    for i in range(5):
        for j in range(5):
            vec = E[i] @ dE[:, j, :] - E[j] @ dE[:, i, :]
            br[i, j] = vec @ Einv
    return br


@pytest.mark.parametrize("seed", range(3))
def test_bracket_array_matches_coordinate_brackets(seed):
    m = random_metric(seed)
    for p in random_points(seed + 20, 3, 0.8):
        br = bracket_coefficients(m, p)["array"]
        np.testing.assert_allclose(br, _bracket_oracle(m, p), atol=1e-8)


def test_bracket_spatial_vorticity_example():
    m = custom(B1="x2")
    c = bracket_coefficients(m, (0, 0, 0, 0, 0))
    # [e_2, e_1] = 2 omega_12 e_0
    assert c["array"][2, 1, 0] == pytest.approx(-1.0)
    assert 2 * c["omega"][0, 1] == pytest.approx(-1.0)


def test_brackets_vanish(mink):
    assert not bracket_coefficients(mink, np.zeros(5))["array"].any()
    rw = build_metric({"family": "rw5", "fields": {"f": "x0*x4"}})
    assert not bracket_coefficients(rw, (2, 0, 0, 0, 3))["array"].any()


def test_brackets_antisymmetric(generic):
    s = sample_fields(generic, (0.3, 0.2, -0.4, 0.5, 0.7))
    br = bracket_array(s, kinematics_from_sample(s))
    np.testing.assert_array_equal(br, -br.transpose(1, 0, 2))
    assert not br[:, :, 1:4].any()


@pytest.mark.parametrize("seed", range(2))
def test_commutator_convergence_order(seed):
    m = random_metric(seed)
    F = parse("sin(x0 + 2*x1 - x4)*exp(0.3*x2) + cos(x3*x4 + x0)")
    p = random_points(seed, 1, 0.5)[0]
    errs, orders = commutator_convergence(m, p, F)
    assert set(orders) == set(BRACKET_FAMILIES)
    for name, order in orders.items():
        assert order >= 1.9, (name, [e[name] for e in errs])
