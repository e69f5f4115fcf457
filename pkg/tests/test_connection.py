import numpy as np
import pytest

from generators import christoffel3_fd, custom, random_metric, random_points
from threaded5d.connection import (
    ROW_NAMES,
    compatibility_residual,
    connection_sample,
    frame_connection_from_christoffel,
    frame_derivatives,
    levi_civita_table,
    spatial_connection,
    table_array,
    torsion_residual,
)
from threaded5d.geodesic import christoffel_from_sample
from threaded5d.kinematics import kinematics_from_sample, raise_index
from threaded5d.metric import build_metric, sample_fields


def test_minkowski_all_zero(mink):
    gamma, gamma_0, gamma_4 = spatial_connection(mink, np.zeros(5))
    assert not (gamma.any() or gamma_0.any() or gamma_4.any())
    assert not table_array(levi_civita_table(mink, np.zeros(5))).any()


def test_table_has_nine_named_rows(generic):
    table = levi_civita_table(generic, (0.1, 0.2, 0.3, 0.4, 0.5))
    assert tuple(table) == ROW_NAMES
    d = table["d_beta:d_alpha"].to_dict()
    assert set(d) == {"spatial", "d0", "d4"}
    assert np.array(d["spatial"]).shape == (3, 3, 3)


def test_rw5_flat_leaf(rw_bilinear):
    gamma, gamma_0, gamma_4 = spatial_connection(rw_bilinear, (2, 0, 0, 0, 3))
    assert not gamma.any()
    np.testing.assert_allclose(gamma_0, 0.5 * np.eye(3), rtol=1e-15)
    np.testing.assert_allclose(gamma_4, np.eye(3) / 3, rtol=1e-15)


def test_rw5_sphere_leaf_matches_christoffels_of_g():
    m = build_metric(
        {"family": "rw5", "fields": {"f": "2 + x0*x4", "g22": "sin(x1)^2", "g33": "sin(x1)^2*sin(x2)^2"}}
    )

    def g(x):
        return np.diag([1.0, np.sin(x[0]) ** 2, np.sin(x[0]) ** 2 * np.sin(x[1]) ** 2])

    for chi, theta, phi in [(1.0, 0.7, 0.2), (0.4, 2.0, -1.0), (2.5, 1.2, 3.0)]:
        gamma, _, _ = spatial_connection(m, (0.3, chi, theta, phi, -0.4))
        np.testing.assert_allclose(gamma, christoffel3_fd(g, (chi, theta, phi)), atol=1e-8)
    # one exact value: Gamma^chi_{theta theta} = -sin(chi) cos(chi)
    gamma, _, _ = spatial_connection(m, (0.3, 1.0, 0.7, 0.2, -0.4))
    assert gamma[0, 1, 1] == pytest.approx(-np.sin(1.0) * np.cos(1.0), rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_torsion_free_and_metric_compatible(seed):
    m = random_metric(seed)
    for p in random_points(seed + 300, 20):
        assert torsion_residual(m, p) <= 1e-9
        assert compatibility_residual(m, p) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_table_matches_coordinate_christoffels(seed):
    m = random_metric(seed)
    for p in random_points(seed + 400, 5):
        s = sample_fields(m, p)
        C = table_array(connection_sample(m, p).lc_table)
        np.testing.assert_allclose(C, frame_connection_from_christoffel(s, christoffel_from_sample(s)), atol=1e-8)


def test_spatial_spatial_row_consistency(generic):
    p = (0.3, 0.2, -0.4, 0.5, 0.7)
    s = sample_fields(generic, p)
    k = kinematics_from_sample(s)
    row = levi_civita_table(generic, p)["d_beta:d_alpha"]
    Phi2, Psi2 = s.Phi.value**2, s.Psi.value**2
    for al in range(3):
        for be in range(3):
            assert row.temporal[be, al] == pytest.approx(k.omega[al, be] + k.theta[al, be] / Phi2, abs=1e-14)
            assert row.vertical[be, al] == pytest.approx(k.eta[al, be] - k.kappa[al, be] / Psi2, abs=1e-14)


def test_spatial_coefficients_relations(generic):
    p = (0.3, 0.2, -0.4, 0.5, 0.7)
    s = sample_fields(generic, p)
    k = kinematics_from_sample(s)
    c = connection_sample(generic, p)
    np.testing.assert_allclose(c.gamma_spatial, np.transpose(c.gamma_spatial, (0, 2, 1)), atol=1e-14)
    Phi2, Psi2 = s.Phi.value**2, s.Psi.value**2
    np.testing.assert_allclose(c.gamma_0, raise_index(s.h_inv, k.theta) + Phi2 * raise_index(s.h_inv, k.omega), atol=1e-14)
    np.testing.assert_allclose(c.gamma_4, raise_index(s.h_inv, k.kappa) - Psi2 * raise_index(s.h_inv, k.eta), atol=1e-14)


def test_vertical_vertical_row_carries_inverse_lapse_squared():
    # only the temporal component of d4:d4 is affected; with Psi depending on x0
    # and Phi = 2, the coefficient is Psi^2 Psi_0 / Phi^2
    m = custom(Phi="2", Psi="exp(0.5*x0)")
    p = np.zeros(5)
    row = levi_civita_table(m, p)["d4:d4"]
    assert row.temporal == pytest.approx(0.5 / 4, rel=1e-15)
    s = sample_fields(m, p)
    C = frame_connection_from_christoffel(s, christoffel_from_sample(s))
    assert C[4, 4, 0] == pytest.approx(0.5 / 4, rel=1e-14)


def test_frame_derivatives_match_finite_differences(generic):
    p = np.array([0.3, 0.2, -0.4, 0.5, 0.7])
    s = sample_fields(generic, p)
    dE = frame_derivatives(s)
    step = 1e-6
    for b in range(5):
        e = np.zeros(5)
        e[b] = step
        fd = (sample_fields(generic, p + e).frame - sample_fields(generic, p - e).frame) / (2 * step)
        np.testing.assert_allclose(dE[:, :, b], fd, atol=1e-8)
