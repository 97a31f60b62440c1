import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from efas_secrecy.beamforming import TxDesign, eve_conditional_distribution, mrt_and_null_space
from efas_secrecy.channel_model import SystemConfig
from efas_secrecy.estimation import prelog_and_threshold
from efas_secrecy.montecarlo import (
    conditional_eve_samples,
    empirical_esr,
    empirical_sop,
    fixed_estimate,
    simulate_channel_statistics,
)
from efas_secrecy.secrecy_analytic import (
    SecrecyReport,
    conditional_secrecy_G,
    conditional_sop,
    esr,
    eve_cdf,
    eve_pdf,
    eve_sinr_law,
    induced_threshold,
    sop,
)

THETA = 2 ** (10 / 9)


def test_induced_threshold_examples():
    assert induced_threshold(THETA - 1, THETA) == pytest.approx(0.0, abs=1e-15)
    assert induced_threshold(0.0, 2.0) == -0.5
    assert induced_threshold(800.64, THETA) == pytest.approx(801.64 / THETA - 1, rel=1e-14)
    assert induced_threshold(800.8, 2.16012) == pytest.approx(370.18, abs=0.01)
    with pytest.raises(ValueError):
        induced_threshold(1.0, 0.5)


def test_conditional_sop_branches(m2_law):
    assert conditional_sop(0.5, 2.0, m2_law) == 1.0
    assert conditional_sop(1e12, 2.0, m2_law) < 1e-9
    t_b = induced_threshold(5.0, 2.0)
    assert conditional_sop(5.0, 2.0, m2_law) == pytest.approx(1 - eve_cdf(t_b, m2_law), abs=1e-14)


def test_conditional_sop_matches_conditional_monte_carlo():
    cfg = SystemConfig(R_th=3.0)
    h = fixed_estimate(cfg)
    stats = eve_conditional_distribution(h, 5.0, 3.0, cfg)
    law = eve_sinr_law(stats, cfg.P_s, cfg.P_a, cfg.sigma2)
    _, theta = prelog_and_threshold(cfg)
    gamma_b = 20.0
    n = 10**6
    samples = conditional_eve_samples(cfg, h, n, seed=4)
    freq = np.mean(samples > induced_threshold(gamma_b, theta))
    se = math.sqrt(max(freq * (1 - freq), 1.0 / n) / n)
    assert abs(conditional_sop(gamma_b, theta, law) - freq) < 3 * se


def test_secrecy_G_examples(m2_law):
    assert conditional_secrecy_G(0.0, m2_law) == 0.0
    dead = eve_sinr_law(m2_law.stats, 0.0, 1.0, 1.0)
    assert conditional_secrecy_G(3.0, dead) == pytest.approx(2.0)
    cdf_form = integrate.quad(lambda t: eve_cdf(t, m2_law) / (1 + t), 0, 1, epsabs=1e-13)[0] / math.log(2)
    pdf_form = integrate.quad(lambda t: math.log2(2 / (1 + t)) * eve_pdf(t, m2_law), 0, 1, epsabs=1e-13)[0]
    g = conditional_secrecy_G(1.0, m2_law)
    assert abs(cdf_form - pdf_form) < 1e-6
    assert g == pytest.approx(cdf_form, abs=1e-7)
    assert g == pytest.approx(0.4912504925, abs=1e-8)


@given(st.floats(0.01, 1e4))
def test_secrecy_G_is_bounded_by_capacity(gstar):
    cfg = SystemConfig()
    stats = eve_conditional_distribution(fixed_estimate(cfg), 5.0, 3.0, cfg)
    law = eve_sinr_law(stats, cfg.P_s, cfg.P_a, cfg.sigma2)
    g = conditional_secrecy_G(gstar, law)
    assert 0.0 <= g <= math.log2(1 + gstar) + 1e-9


def test_report_validation():
    with pytest.raises(ValueError):
        SecrecyReport("sop", 1.5, "analytic")
    with pytest.raises(ValueError):
        SecrecyReport("esr", 1.0, "hybrid")
    with pytest.raises(ValueError):
        SecrecyReport("esr", float("nan"), "analytic")


def test_sop_tends_to_one_at_low_power():
    assert sop(SystemConfig(P=1e-6)).value > 0.999


def test_sop_is_one_without_data_power():
    assert sop(SystemConfig(alpha=0.0)).value == 1.0


def test_sop_worst_case_and_monotone_in_beta_e():
    vals = [sop(SystemConfig(alpha=1.0, beta_e=b, beta_e_mode="fixed"), mode="fixed-beta_e").value for b in (1.0, 2.0, 3.0)]
    assert vals[0] <= vals[1] <= vals[2]
    worst = sop(SystemConfig(alpha=1.0), mode="worst-case")
    assert worst.value == pytest.approx(vals[2], abs=1e-12)
    assert worst.metric == "sop-worst-case"


@pytest.mark.parametrize("R_th, alpha, P", [(1.0, 0.7, 100.0), (4.0, 0.9, 10.0), (6.0, 0.9, 100.0)])
def test_sop_matches_full_pipeline(R_th, alpha, P):
    cfg = SystemConfig(R_th=R_th, alpha=alpha, P=P)
    a = sop(cfg)
    e = empirical_sop(cfg, 100_000, seed=8)
    assert abs(a.value - e.value) < 3 * math.hypot(a.stderr, e.stderr) + 1e-12


def test_esr_quadrature_matches_pipeline_with_common_draws():
    st_ = simulate_channel_statistics(SystemConfig(), 100_000, seed=3)
    for rho in (0.0, 0.6):
        cfg = SystemConfig(rho=rho)
        st_rho = simulate_channel_statistics(cfg, 100_000, seed=3)
        a = esr(cfg)
        e = empirical_esr(cfg, stats=st_rho)
        assert abs(a.value - e.value) < 3 * e.stderr
    assert st_.n == 100_000


def test_esr_gauss_laguerre_node_convergence():
    cfg = SystemConfig()
    assert esr(cfg, n_nodes=20).value == pytest.approx(esr(cfg, n_nodes=40).value, rel=1e-6)


def test_esr_quadrature_vs_outer_monte_carlo_small():
    cfg = SystemConfig()
    q = esr(cfg)
    mc = esr(cfg, outer="monte-carlo", n_outer=10_000, tol=1e-6)
    assert mc.method == "hybrid" and q.method == "analytic"
    assert abs(q.value - mc.value) < 3 * mc.stderr


@pytest.mark.slow
def test_esr_quadrature_vs_outer_monte_carlo_1e5():
    cfg = SystemConfig()
    q = esr(cfg)
    mc = esr(cfg, outer="monte-carlo", n_outer=100_000, tol=1e-6)
    assert abs(q.value - mc.value) <= mc.ci_halfwidth


def test_esr_trends_at_default_power():
    assert esr(SystemConfig(rho=0.0)).value > esr(SystemConfig(rho=0.6)).value
    assert esr(SystemConfig()).value > esr(SystemConfig().with_(beta_b=1.0)).value


def test_esr_zero_without_data_power():
    assert esr(SystemConfig(alpha=0.0)).value == 0.0


def test_esr_random_routing_gain_uses_outer_sampling():
    from efas_secrecy.channel_model import RoutingGainDistribution

    cfg = SystemConfig(beta_b_dist=RoutingGainDistribution("uniform", {"low": 4.0, "high": 6.0}))
    r = esr(cfg, n_outer=2_000, tol=1e-6)
    assert r.method == "hybrid" and r.n_outer == 2_000
    e = empirical_esr(cfg, 100_000, seed=5)
    assert abs(r.value - e.value) < 3 * math.hypot(r.stderr, e.stderr)


def _general_cfg(seed=0, M=5):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    b = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return SystemConfig(M=M, R_b=a @ a.conj().T / M + 0.2 * np.eye(M), R_e=b @ b.conj().T / M + 0.2 * np.eye(M),
                        rho=0.5, R_th=2.0)


def test_general_path_matches_pipeline_when_structure_holds():
    """Non-identity but scaled-identity correlation runs the matrix path and keeps the law exact."""
    cfg = SystemConfig(M=6, R_b=2.0 * np.eye(6), C=0.9 * np.eye(6), R_th=5.0)
    assert not cfg.is_isotropic
    a = sop(cfg, n_outer=3_000)
    e = empirical_sop(cfg, 100_000, seed=2)
    assert abs(a.value - e.value) < 3 * math.hypot(a.stderr, e.stderr)
    r = esr(cfg, n_outer=1_500, tol=1e-6)
    m = empirical_esr(cfg, 100_000, seed=2)
    assert abs(r.value - m.value) < 3 * math.hypot(r.stderr, m.stderr)


def test_anisotropic_law_is_flagged_as_approximate():
    """With anisotropic correlation ``X`` couples to the AN subspace; the closed-form law ignores this."""
    cfg = _general_cfg().with_(R_th=7.0)
    stats = eve_conditional_distribution(fixed_estimate(cfg), 5.0, 3.0, cfg)
    assert not stats.is_exact and stats.xy_coupling > 0
    a = sop(cfg, n_outer=3_000)
    e = empirical_sop(cfg, 100_000, seed=2)
    # the neglected coupling biases the hybrid SOP; the pipeline is the reference
    assert abs(a.value - e.value) > 3 * math.hypot(a.stderr, e.stderr)


@given(st.integers(0, 1000))
def test_metrics_are_basis_invariant(seed):
    cfg = _general_cfg(seed % 7)
    h = fixed_estimate(cfg, seed=seed)
    d1 = mrt_and_null_space(h)
    r = np.random.default_rng(seed)
    q, _ = np.linalg.qr(r.standard_normal((4, 4)) + 1j * r.standard_normal((4, 4)))
    d2 = TxDesign(d1.w, d1.V @ q)
    s1 = eve_conditional_distribution(h, 5.0, 3.0, cfg, d1)
    s2 = eve_conditional_distribution(h, 5.0, 3.0, cfg, d2)
    assert s1.kappa == pytest.approx(s2.kappa, abs=1e-9)
    assert s1.sigma2_X == pytest.approx(s2.sigma2_X, abs=1e-9)
    np.testing.assert_allclose(s1.Q_spectrum.expanded(), s2.Q_spectrum.expanded(), atol=1e-9)
    l1, l2 = (eve_sinr_law(s, cfg.P_s, cfg.P_a, cfg.sigma2) for s in (s1, s2))
    assert conditional_sop(30.0, 2.0, l1) == pytest.approx(conditional_sop(30.0, 2.0, l2), abs=1e-9)
    assert conditional_secrecy_G(30.0, l1) == pytest.approx(conditional_secrecy_G(30.0, l2), abs=1e-9)
