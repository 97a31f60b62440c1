import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from efas_secrecy.beamforming import (
    TxDesign,
    bob_sinr,
    eve_conditional_distribution,
    eve_conditional_moments,
    eve_sinr_realization,
    isotropic_eve_stats,
    mrt_and_null_space,
)
from efas_secrecy.channel_model import SystemConfig
from efas_secrecy.errors import DegenerateEstimateError
from efas_secrecy.estimation import isotropic_variances
from efas_secrecy.montecarlo import conditional_eve_channels, fixed_estimate

complex_vectors = st.integers(0, 2**32 - 1).map(
    lambda s: (lambda r: r.standard_normal(6) + 1j * r.standard_normal(6))(np.random.default_rng(s))
)


def _rotated_basis(design: TxDesign, seed: int) -> TxDesign:
    """Another valid AN basis: ``V`` times a random unitary."""
    r = np.random.default_rng(seed)
    k = design.V.shape[1]
    q, _ = np.linalg.qr(r.standard_normal((k, k)) + 1j * r.standard_normal((k, k)))
    return TxDesign(design.w, design.V @ q)


def test_axis_aligned_estimate():
    d = mrt_and_null_space(np.array([2.0, 0, 0, 0], dtype=complex))
    np.testing.assert_allclose(d.w, [1, 0, 0, 0])
    np.testing.assert_allclose(np.abs(d.V[0]), 0.0, atol=1e-15)
    np.testing.assert_allclose(d.V.conj().T @ d.V, np.eye(3), atol=1e-14)


def test_zero_estimate_rejected():
    with pytest.raises(DegenerateEstimateError):
        mrt_and_null_space(np.zeros(4))


@given(complex_vectors)
def test_design_geometry(h):
    d = mrt_and_null_space(h)
    assert np.linalg.norm(d.w) == pytest.approx(1.0, abs=1e-12)
    assert abs(np.vdot(d.w, h)) == pytest.approx(np.linalg.norm(h), rel=1e-12)
    np.testing.assert_allclose(d.V.conj().T @ d.V, np.eye(5), atol=1e-12)
    assert np.max(np.abs(d.V.conj().T @ h)) < 1e-12 * np.linalg.norm(h)


@given(complex_vectors, st.integers(0, 1000))
def test_an_power_is_basis_invariant(h, seed):
    d1 = mrt_and_null_space(h)
    d2 = _rotated_basis(d1, seed)
    h_e = np.random.default_rng(seed).standard_normal(6) + 0j
    a = np.sum(np.abs(d1.V.conj().T @ h_e) ** 2)
    b = np.sum(np.abs(d2.V.conj().T @ h_e) ** 2)
    assert a == pytest.approx(b, abs=1e-9)
    assert eve_sinr_realization(h_e, d1, 2.0, 1.0, 1.0) == pytest.approx(eve_sinr_realization(h_e, d2, 2.0, 1.0, 1.0), abs=1e-9)


def test_bob_sinr_examples():
    h = np.zeros(16, dtype=complex)
    h[0] = math.sqrt(80.0)
    assert bob_sinr(h, 0.0, 50.0, 50.0, 1.0) == pytest.approx(50 * 80.0)
    g = bob_sinr(h, 5 / 1001, 50.0, 50.0, 1.0)
    assert g == pytest.approx(50 * 80 / ((5 / 1001) * (50 + 50 * 15) + 1), rel=1e-14)
    assert g == pytest.approx(800.64, abs=0.01)


@given(complex_vectors, st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_matrix_bob_sinr_matches_scalar(h, P_s, P_a):
    om = 0.01
    assert bob_sinr(h, om * np.eye(6), P_s, P_a, 1.0) == pytest.approx(bob_sinr(h, om, P_s, P_a, 1.0), rel=1e-12, abs=1e-15)


def test_eve_sinr_geometry():
    d = mrt_and_null_space(np.array([1.0, 1.0j, 0.0, 0.0]))
    aligned = 3.0 * d.w
    assert eve_sinr_realization(aligned, d, 2.0, 5.0, 1.0) == pytest.approx(2.0 * 9.0)
    orth = d.V[:, 0]
    assert eve_sinr_realization(orth, d, 2.0, 5.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    h_e = np.array([0.3, -1.0, 2.0j, 0.5])
    assert eve_sinr_realization(h_e, d, 4.0, 0.0, 2.0) == pytest.approx(4.0 * abs(np.vdot(h_e, d.w)) ** 2 / 2.0)


@given(complex_vectors, complex_vectors)
def test_projector_identity(h, h_e):
    d = mrt_and_null_space(h)
    x2 = abs(np.vdot(h_e, d.w)) ** 2
    y = np.sum(np.abs(d.V.conj().T @ h_e) ** 2)
    assert x2 + y == pytest.approx(np.sum(np.abs(h_e) ** 2), abs=1e-9)


@pytest.mark.parametrize("mode", ["exact-conditional", "paper-approx"])
def test_zero_rho_has_no_leakage_mean(mode):
    cfg = SystemConfig(rho=0.0, variance_mode=mode)
    h = fixed_estimate(cfg)
    s = eve_conditional_distribution(h, 5.0, 3.0, cfg)
    assert s.kappa == 0.0 and abs(s.mu_X) == 0.0
    np.testing.assert_allclose(eve_conditional_moments(h, 5.0, 3.0, cfg).cov_e, 3.0 * np.eye(16), atol=1e-12)


def test_isotropic_conditional_law_closed_form():
    cfg = SystemConfig()
    h = fixed_estimate(cfg)
    nh2 = float(np.sum(np.abs(h) ** 2))
    _, ot = isotropic_variances(5.0, cfg)
    s2 = 3.0 * (0.36 * ot / 5.0 + 0.64)
    s = eve_conditional_distribution(h, 5.0, 3.0, cfg)
    assert abs(s.mu_X) == pytest.approx(0.6 * math.sqrt(3 / 5) * math.sqrt(nh2), rel=1e-10)
    assert s.sigma2_X == pytest.approx(s2, rel=1e-10)
    assert s.kappa == pytest.approx(0.36 * 0.6 * nh2 / s2, rel=1e-10)
    assert list(s.Q_spectrum.multiplicities) == [15]
    assert s.Q_spectrum.values[0] == pytest.approx(s2, rel=1e-10)
    assert s.is_exact
    k_iso, s2_iso = isotropic_eve_stats(nh2, 5.0, 3.0, cfg)
    assert k_iso == pytest.approx(s.kappa, rel=1e-10) and s2_iso == pytest.approx(s2, rel=1e-12)


def test_approximate_variance_is_biased_low():
    cfg = SystemConfig()
    h = fixed_estimate(cfg)
    exact = eve_conditional_distribution(h, 5.0, 3.0, cfg).sigma2_X
    approx = eve_conditional_distribution(h, 5.0, 3.0, cfg.with_(variance_mode="paper-approx")).sigma2_X
    _, ot = isotropic_variances(5.0, cfg)
    assert exact - approx == pytest.approx(3.0 * 0.36 * ot / 5.0, rel=1e-10)


def test_conditional_moment_oracle():
    """Sampling by the conditioning update reproduces the analytic mean and variance of ``X``."""
    rng = np.random.default_rng(11)
    M = 6
    a = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    R_b = a @ a.conj().T / M + 0.2 * np.eye(M)
    b = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    R_e = b @ b.conj().T / M + 0.2 * np.eye(M)
    C, _ = np.linalg.qr(rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M)))
    cfg = SystemConfig(M=M, R_b=R_b, R_e=R_e, C=C, rho=0.7, rho_p=0.05)
    h = fixed_estimate(cfg, seed=3)
    s = eve_conditional_distribution(h, 5.0, 3.0, cfg)
    n = 400_000
    h_e = conditional_eve_channels(cfg, h, n, beta_b=5.0, beta_e=3.0, seed=5)
    x = h_e.conj() @ mrt_and_null_space(h).w
    mean_x = np.conj(s.mu_X)
    assert abs(x.mean() - mean_x) < 3 * math.sqrt(s.sigma2_X / n) * math.sqrt(2)
    var = np.mean(np.abs(x - x.mean()) ** 2)
    se_var = np.std(np.abs(x - x.mean()) ** 2) / math.sqrt(n)
    assert abs(var - s.sigma2_X) < 3 * se_var


@given(st.floats(1.1, 5.0))
def test_eve_sinr_increases_with_beta_e(c):
    d = mrt_and_null_space(np.array([1.0, 0.5, -0.2j]))
    h_e = np.array([0.4, 1.0j, 0.3])
    g1 = eve_sinr_realization(h_e, d, 1.0, 1.0, 1.0)
    g2 = eve_sinr_realization(math.sqrt(c) * h_e, d, 1.0, 1.0, 1.0)
    assert g2 > g1
