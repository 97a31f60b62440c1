import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from efas_secrecy.errors import SeriesTruncationError
from efas_secrecy.statmath import (
    EigenSpectrum,
    check_hermitian,
    erlang_mixture,
    gauss_laguerre,
    hermitian_eigenspectrum,
    hypoexp_tail,
    partial_fraction_coefficients,
    poisson_truncation_index,
    psd_sqrt,
    sample_standard_complex_gaussian,
)


def test_complex_gaussian_second_moments():
    z = sample_standard_complex_gaussian(4, np.random.default_rng(1), 10**6)
    cov = z.T @ z.conj() / z.shape[0]
    pseudo = z.T @ z / z.shape[0]
    assert np.max(np.abs(cov - np.eye(4))) < 0.01
    assert np.max(np.abs(pseudo)) < 0.01


def test_complex_gaussian_determinism():
    a = sample_standard_complex_gaussian(5, np.random.default_rng(7))
    b = sample_standard_complex_gaussian(5, np.random.default_rng(7))
    assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "m, values, mult",
    [
        (np.eye(3), [1.0], [3]),
        (np.diag([3.0, 2.0, 1.0]), [3.0, 2.0, 1.0], [1, 1, 1]),
        (np.diag([1.0, 1.0 + 1e-12]), [1.0], [2]),
    ],
)
def test_eigenspectrum_clustering(m, values, mult):
    s = hermitian_eigenspectrum(m, 1e-8)
    np.testing.assert_allclose(s.values, values, rtol=1e-12)
    assert list(s.multiplicities) == mult


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_psd_sqrt_squares_back(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = a @ a.conj().T
    r = psd_sqrt(m)
    np.testing.assert_allclose(r @ r, m, atol=1e-10)


@pytest.mark.parametrize(
    "lam, coef",
    [([1.0], [1.0]), ([2.0, 1.0], [2.0, -1.0]), ([3.0, 2.0, 1.0], [4.5, -4.0, 0.5])],
)
def test_partial_fraction_examples(lam, coef):
    np.testing.assert_allclose(partial_fraction_coefficients(lam).coefficients, coef, rtol=1e-12)


@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=7, unique=True))
def test_partial_fraction_normalization(lam):
    lam = np.array(lam)
    if lam.size > 1 and np.min(np.diff(np.sort(lam)) / np.sort(lam)[1:]) < 1e-2:
        return
    assert abs(partial_fraction_coefficients(lam).coefficients.sum() - 1.0) < 1e-9


def test_repeated_poles_rejected():
    with pytest.raises(ValueError):
        partial_fraction_coefficients([1.0, 1.0])


def test_hypoexp_tail_examples():
    assert hypoexp_tail(EigenSpectrum([2.0, 0.5], [1, 1]), 0.0) == 1.0
    assert hypoexp_tail(EigenSpectrum([2.0], [1]), 2.0) == pytest.approx(math.exp(-1), rel=1e-12)
    assert hypoexp_tail(EigenSpectrum([1.0], [3]), 1.0) == pytest.approx(2.5 * math.exp(-1), rel=1e-12)
    assert hypoexp_tail(EigenSpectrum([1.0], [3]), 1.0) == pytest.approx(0.919699, abs=1e-6)


def test_erlang_tail_matches_gamma_law():
    y = np.linspace(0.0, 12.0, 25)
    np.testing.assert_allclose(hypoexp_tail(EigenSpectrum([1.5], [4]), y), stats.gamma(4, scale=1.5).sf(y), atol=1e-13)


@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=4), st.lists(st.integers(1, 3), min_size=4, max_size=4))
def test_hypoexp_tail_is_a_survival_function(vals, mults):
    vals = np.unique(np.round(vals, 1))
    spec = EigenSpectrum(vals[::-1], mults[: vals.size])
    y = np.linspace(0.0, 40.0 * vals.max() * spec.dim, 60)
    tail = hypoexp_tail(spec, y)
    assert tail[0] == 1.0
    assert np.all(np.diff(tail) <= 1e-12)
    assert tail[-1] < 1e-8


def test_erlang_mixture_mass_is_one():
    mix = erlang_mixture(EigenSpectrum([3.0, 1.0, 0.5], [2, 3, 1]))
    assert mix.coefficients.sum() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
def test_multiplicity_continuity(y):
    eps = 1e-6
    distinct = hypoexp_tail(EigenSpectrum([1.0 + eps, 1.0], [1, 1]), y)
    clustered = hypoexp_tail(hermitian_eigenspectrum(np.diag([1.0, 1.0 + eps]), 1e-5), y)
    assert abs(distinct - clustered) < 1e-4


@pytest.mark.parametrize("spec", [EigenSpectrum([2.0, 0.7, 0.3], [1, 1, 1]), EigenSpectrum([1.0, 0.4], [3, 2])])
def test_hypoexp_tail_sampling_oracle(spec):
    n = 10**6
    rng = np.random.default_rng(99)
    lam = spec.expanded()
    y = rng.exponential(1.0, (n, lam.size)) @ lam
    grid = np.quantile(y, np.linspace(0.05, 0.95, 10))
    emp = np.array([(y > g).mean() for g in grid])
    se = np.sqrt(emp * (1 - emp) / n)
    assert np.all(np.abs(hypoexp_tail(spec, grid) - emp) < 3 * se + 1e-12)


def test_gauss_laguerre_examples():
    r1 = gauss_laguerre(1)
    np.testing.assert_allclose(r1.nodes, [1.0])
    np.testing.assert_allclose(r1.weights, [1.0])
    r2 = gauss_laguerre(2)
    np.testing.assert_allclose(r2.nodes, [2 - math.sqrt(2), 2 + math.sqrt(2)], rtol=1e-13)
    assert r2.integrate(lambda x: x**3) == pytest.approx(6.0, abs=1e-10)


@given(st.integers(1, 40))
def test_gauss_laguerre_moment_exactness(n):
    rule = gauss_laguerre(n)
    for k in range(0, min(2 * n, 30)):
        assert rule.integrate(lambda x: x**k) == pytest.approx(math.factorial(k), rel=1e-9)


@given(st.integers(2, 24), st.floats(0.0, 20.0))
def test_generalized_gauss_laguerre_matches_gamma_moments(n, a):
    rule = gauss_laguerre(n, a)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-11)
    # E[X^2] for X ~ Gamma(a + 1)
    assert rule.integrate(lambda x: x**2) == pytest.approx((a + 1) * (a + 2), rel=1e-9)


def test_gauss_laguerre_rejects_bad_order():
    with pytest.raises(ValueError):
        gauss_laguerre(0)
    with pytest.raises(ValueError):
        gauss_laguerre(65)


def test_poisson_truncation_examples():
    assert poisson_truncation_index(0.0) == 0
    assert poisson_truncation_index(1.0, 1e-12) == 14
    assert poisson_truncation_index(10.0, 1e-12) == 39
    assert stats.poisson(10.0).sf(39) < 1e-12 <= stats.poisson(10.0).sf(38)


@given(st.floats(0.01, 500.0), st.sampled_from([1e-6, 1e-9, 1e-12]))
def test_poisson_truncation_is_minimal(kappa, eps):
    m = poisson_truncation_index(kappa, eps)
    assert stats.poisson(kappa).sf(m) < eps * (1 + 1e-6)
    if m > 0:
        assert stats.poisson(kappa).sf(m - 1) >= eps * (1 - 1e-6)


def test_poisson_truncation_cap():
    with pytest.raises(SeriesTruncationError):
        poisson_truncation_index(1e6)
