import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from efas_secrecy.beamforming import ConditionalEveStats, eve_conditional_distribution
from efas_secrecy.channel_model import SystemConfig
from efas_secrecy.montecarlo import conditional_eve_samples, empirical_conditional_cdf, fixed_estimate
from efas_secrecy.secrecy_analytic import eve_cdf, eve_pdf, eve_sinr_law
from efas_secrecy.secrecy_analytic.eve_law import count_pmf_direct, law_components, survival_batch
from efas_secrecy.statmath import EigenSpectrum


def _default_law(rho=0.6, **kw):
    cfg = SystemConfig(rho=rho, **kw)
    h = fixed_estimate(cfg)
    stats = eve_conditional_distribution(h, cfg.beta_b_dist.mean, cfg.effective_beta_e, cfg)
    return cfg, h, eve_sinr_law(stats, cfg.P_s, cfg.P_a, cfg.sigma2)


def test_cdf_vanishes_at_zero(m2_law):
    assert eve_cdf(0.0, m2_law) == 0.0
    assert eve_cdf(0.0, _default_law()[2]) == 0.0


def test_single_an_dimension_example(m2_law):
    expected = 1.0 - math.exp(-1.0) / 2.0
    assert eve_cdf(1.0, m2_law) == pytest.approx(expected, abs=1e-12)
    assert eve_cdf(1.0, m2_law) == pytest.approx(0.816060, abs=1e-6)
    # literal series agrees when there is no leakage mean
    assert eve_cdf(1.0, m2_law, "paper-eq48") == pytest.approx(expected, abs=1e-12)


def test_density_at_zero(m2_law):
    assert eve_pdf(0.0, m2_law) == pytest.approx(2.0, abs=1e-12)
    assert eve_pdf(0.0, m2_law, "paper-eq63") == pytest.approx(2.0, abs=1e-12)


def test_noncentral_closed_form_without_an():
    """No AN: ``gamma_e = P_s |X|^2 / sigma2`` is a scaled noncentral chi-square."""
    from scipy import stats

    law = eve_sinr_law(ConditionalEveStats(1.5, 1.0, EigenSpectrum([1.0], [3]), 2.25), 1.0, 0.0, 1.0)
    t = np.array([0.5, 2.0, 6.0])
    np.testing.assert_allclose(eve_cdf(t, law), stats.ncx2(2, 2 * 2.25).cdf(2 * t), atol=1e-12)


def test_count_recurrence_matches_direct_convolution():
    comps = law_components(EigenSpectrum([2.0, 0.5], [1, 1]))
    t = np.array([0.3, 1.7])
    direct = np.array([count_pmf_direct(0.4 * x, 0.8 * x * np.array([2.0, 0.5]) / (1 + 0.8 * x * np.array([2.0, 0.5])), 60)
                       for x in t])
    w = np.exp(-3.0) * 3.0 ** np.arange(61) / np.array([math.factorial(k) for k in range(61)])
    sf_direct = np.array([np.sum(w * (1 - np.cumsum(p))) for p in direct])
    np.testing.assert_allclose(survival_batch(t, 3.0, 0.4, 0.8, comps), 1 - sf_direct, rtol=1e-9)


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.6])
def test_cdf_matches_conditional_monte_carlo(rho):
    cfg, h, law = _default_law(rho)
    samples = conditional_eve_samples(cfg, h, 200_000, seed=17)
    grid = np.quantile(samples, np.linspace(0.03, 0.97, 12))
    emp = empirical_conditional_cdf(cfg, h, grid, samples=samples)
    an = eve_cdf(grid, law)
    assert all(abs(a - e.value) < 3.5 * e.stderr for a, e in zip(an, emp))


def test_literal_cdf_series_deviates_with_leakage_mean():
    _, _, law = _default_law(0.6)
    t = np.array([2.0, 5.0, 10.0])
    gap = np.abs(eve_cdf(t, law, "paper-eq48") - eve_cdf(t, law))
    assert gap.max() > 1e-3


def law_configs():
    return st.builds(
        lambda rho, beta_e, P_dB, alpha, M, seed: (SystemConfig(rho=rho, beta_e_set=(0.5, beta_e), P=10 ** (P_dB / 10),
                                                               alpha=alpha, M=M), seed),
        st.floats(0.0, 0.95), st.floats(0.5, 6.0), st.floats(-10.0, 40.0), st.floats(0.05, 0.99),
        st.integers(2, 24), st.integers(0, 10_000),
    )


@given(law_configs())
def test_cdf_validity_over_random_configs(case):
    cfg, seed = case
    h = fixed_estimate(cfg, seed=seed)
    law = eve_sinr_law(eve_conditional_distribution(h, 5.0, cfg.effective_beta_e, cfg), cfg.P_s, cfg.P_a, cfg.sigma2)
    t = np.concatenate(([0.0], np.geomspace(1e-4, 1e4, 40)))
    F = eve_cdf(t, law)
    assert F[0] == 0.0
    assert np.all(np.diff(F) >= -1e-12)
    assert np.all((F >= 0) & (F <= 1))
    assert eve_cdf(1e12, law) > 1 - 1e-6


@given(st.integers(0, 10_000), st.floats(0.0, 0.9))
def test_cdf_validity_with_distinct_eigenvalues(seed, rho):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    R_e = a @ a.conj().T / 5 + 0.1 * np.eye(5)
    cfg = SystemConfig(M=5, rho=rho, R_e=R_e)
    h = fixed_estimate(cfg, seed=seed)
    law = eve_sinr_law(eve_conditional_distribution(h, 5.0, 3.0, cfg), cfg.P_s, cfg.P_a, cfg.sigma2)
    F = eve_cdf(np.geomspace(1e-3, 1e3, 30), law)
    assert np.all(np.diff(F) >= -1e-12) and F[-1] > 0.99


def test_truncation_stability():
    _, _, law = _default_law(0.6)
    t = np.array([0.5, 2.0, 8.0, 20.0])
    deep = eve_sinr_law(law.stats, law.P_s, law.P_a, law.sigma2, tail_eps=1e-30)
    assert deep.m_max >= law.m_max + 5
    assert np.max(np.abs(eve_cdf(t, deep) - eve_cdf(t, law))) < 1e-10


@pytest.mark.parametrize("kappa", [0.0, 2.0])
def test_repeated_eigenvalues_match_perturbed_distinct(kappa):
    rep = eve_sinr_law(ConditionalEveStats(math.sqrt(kappa), 1.0, EigenSpectrum([0.8], [3]), kappa), 1.0, 0.5, 1.0)
    eps = 1e-4
    dis = eve_sinr_law(ConditionalEveStats(math.sqrt(kappa), 1.0, EigenSpectrum([0.8 * (1 + eps), 0.8, 0.8 * (1 - eps)], [1, 1, 1]), kappa), 1.0, 0.5, 1.0)
    t = np.array([0.1, 1.0, 3.0, 10.0])
    assert np.max(np.abs(eve_cdf(t, rep) - eve_cdf(t, dis))) < 1e-4
    assert np.max(np.abs(eve_pdf(t, rep) - eve_pdf(t, dis))) < 1e-4


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.6])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_pdf_matches_finite_differences(rho, t):
    _, _, law = _default_law(rho)
    h = 1e-5 * t
    fd = (eve_cdf(t + h, law) - eve_cdf(t - h, law)) / (2 * h)
    f = eve_pdf(t, law)
    assert abs(f - fd) <= 1e-5 * abs(f) + 1e-12


@pytest.mark.parametrize("rho", [0.0, 0.6])
def test_pdf_normalization(rho):
    _, _, law = _default_law(rho)
    upper = 1.0
    while 1.0 - eve_cdf(upper, law) > 1e-9:
        upper *= 2.0
    # integrate in u = log(1 + t) to resolve both the mode and the tail
    total, _ = integrate.quad(lambda u: eve_pdf(math.expm1(u), law) * math.exp(u), 0.0, math.log1p(upper),
                              epsabs=1e-11, epsrel=1e-11, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_literal_pdf_series_deviates_from_derivative():
    _, _, law = _default_law(0.6)
    t = np.array([0.1, 1.0, 10.0])
    assert np.max(np.abs(eve_pdf(t, law, "paper-eq63") - eve_pdf(t, law))) > 1e-3


def test_degenerate_law_and_bad_inputs(m2_law):
    dead = eve_sinr_law(m2_law.stats, 0.0, 1.0, 1.0)
    assert eve_cdf(0.0, dead) == 1.0 and eve_cdf(5.0, dead) == 1.0
    with pytest.raises(ValueError):
        eve_cdf(-1.0, m2_law)
    with pytest.raises(ValueError):
        eve_cdf(1.0, m2_law, "nope")
    with pytest.raises(ValueError):
        eve_sinr_law(m2_law.stats, 1.0, 0.0, 0.0)
