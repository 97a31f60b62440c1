import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from efas_secrecy.secrecy_analytic.quadrature import (
    NODES,
    W_GAUSS,
    W_KRONROD,
    IntegrationError,
    adaptive_gk15,
    golden_section_max,
)


def test_rule_weights_integrate_constants_and_polynomials():
    assert W_KRONROD.sum() == pytest.approx(2.0, abs=1e-14)
    assert W_GAUSS.sum() == pytest.approx(2.0, abs=1e-14)
    # Kronrod is exact to degree 22 and Gauss-7 to degree 13
    assert W_KRONROD @ NODES**22 == pytest.approx(2.0 / 23.0, abs=1e-14)
    assert W_GAUSS @ NODES**12 == pytest.approx(2.0 / 13.0, abs=1e-14)


def test_batched_owners_with_different_limits():
    upper = np.array([1.0, 2.0, 0.0, 5.0])
    vals, errs = adaptive_gk15(lambda o, x: np.exp(-x), upper, tol=1e-12)
    np.testing.assert_allclose(vals, 1.0 - np.exp(-upper), atol=1e-12)
    assert vals[2] == 0.0
    assert np.all(errs <= 1e-12)


def test_owner_index_selects_integrand():
    scale = np.array([1.0, 3.0])
    vals, _ = adaptive_gk15(lambda o, x: scale[o] * np.cos(x), np.array([math.pi / 2, math.pi / 2]), tol=1e-12)
    np.testing.assert_allclose(vals, scale, atol=1e-12)


def test_kink_requires_refinement():
    vals, _ = adaptive_gk15(lambda o, x: np.abs(x - 0.3), np.array([1.0]), tol=1e-10)
    assert vals[0] == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.7**2, abs=1e-10)


def test_interval_cap_raises():
    with pytest.raises(IntegrationError):
        adaptive_gk15(lambda o, x: np.sign(np.sin(1e4 * x)), np.array([1.0]), tol=1e-15, max_intervals=8)


@given(st.floats(0.05, 0.95))
def test_golden_section_finds_parabola_peak(c):
    x, fx = golden_section_max(lambda a: -(a - c) ** 2, 0.0, 1.0, width=1e-6)
    assert abs(x - c) < 1e-6
    assert fx <= 0.0


def test_golden_section_boundary_maximum():
    x, _ = golden_section_max(lambda a: a, 0.0, 1.0, width=1e-4)
    assert x > 1.0 - 1e-4
