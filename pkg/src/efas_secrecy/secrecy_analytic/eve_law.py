"""Conditional law of the eavesdropper SINR given the channel estimate.

Write ``gamma_e = P_s |X|^2 / (P_a Y + sigma2)`` with ``Z = |X|^2 / sigma2_X``
noncentral (noncentrality ``kappa``) and ``Y = sum_i l_i E_i``.  Then

    F(t) = P(Z <= t (a + b Y)),   a = sigma2 / (P_s sigma2_X),  b = P_a / (P_s sigma2_X).

Conditioning on the Poisson index ``K ~ Poisson(kappa)`` of ``Z`` and using
``P(Gamma(K + 1) <= s) = P(Poisson(s) > K)`` gives

    F(t) = P(N > K),   N | Y ~ Poisson(t (a + b Y)).

Unconditionally ``N`` is a Poisson(``a t``) count plus, for each eigenvalue,
a negative binomial count with success probability ``q_i = b t l_i / (1 + b t l_i)``.
Its pmf obeys a short linear recurrence, so ``F``, its derivative and the
survival ``1 - F`` all reduce to finite sums over ``k <= m_max`` without any
numerical differentiation or integration.

Repeated eigenvalues enter through the signed Erlang mixture of ``Y``; each
mixture component is a single negative binomial of integer order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from scipy import special

from ..beamforming import ConditionalEveStats
from ..statmath import EigenSpectrum, erlang_mixture, poisson_truncation_index

__all__ = [
    "EveSinrLaw",
    "PDF_VARIANTS",
    "CDF_VARIANTS",
    "count_pmf_direct",
    "eve_cdf",
    "eve_pdf",
    "eve_sinr_law",
    "law_components",
    "survival_batch",
    "density_batch",
]

CDF_VARIANTS = ("exact", "paper-eq48")
PDF_VARIANTS = ("exact-derivative", "paper-eq63")
ILL_CONDITIONED_MASS = 1e6
_RESCALE = 1e150
_BUCKET = 16_384


# ---------------------------------------------------------------------------
# Law container


@dataclass(frozen=True)
class Components:
    """Negative-binomial mixture describing the AN term.

    ``lam``, ``order`` and ``coef`` give the signed Erlang mixture of ``Y``.
    ``raw`` holds the expanded positive eigenvalues for the all-positive
    fallback recursion, used when ``direct`` is True.
    """

    lam: np.ndarray
    order: np.ndarray
    coef: np.ndarray
    raw: np.ndarray
    direct: bool

    @property
    def mean_y(self) -> float:
        return float(np.sum(self.raw))


def law_components(spectrum: EigenSpectrum) -> Components:
    """Mixture components for a (possibly degenerate) AN-subspace spectrum."""
    pos = spectrum.positive_part()
    if pos.values.size == 0:
        zero = np.zeros(1)
        return Components(zero, np.ones(1, dtype=int), np.ones(1), np.zeros(0), False)
    mix = erlang_mixture(pos)
    return Components(
        mix.scales, mix.shapes, mix.coefficients, pos.expanded(), mix.abs_mass > ILL_CONDITIONED_MASS
    )


@dataclass(frozen=True, eq=False)
class EveSinrLaw:
    """Conditional eavesdropper-SINR law.

    Parameters
    ----------
    stats : ConditionalEveStats
    P_s, P_a : float
        Data and AN powers (``P_s = 0`` yields the degenerate law ``gamma_e = 0``).
    sigma2 : float
        Eavesdropper noise variance; ``0`` gives the high-SNR limiting law.
    tail_eps : float
        Poisson tail mass neglected by the truncation.
    """

    stats: ConditionalEveStats
    P_s: float
    P_a: float
    sigma2: float
    tail_eps: float = 1e-12

    def __post_init__(self):
        if self.P_s < 0 or self.P_a < 0 or self.sigma2 < 0:
            raise ValueError("powers and noise variance must be nonnegative")
        if self.P_s > 0 and self.P_a == 0 and self.sigma2 == 0:
            raise ValueError("law is undefined with zero AN power and zero noise")

    @property
    def degenerate(self) -> bool:
        """True when no data power is sent, so ``gamma_e = 0`` almost surely."""
        return self.P_s == 0

    @property
    def kappa(self) -> float:
        return self.stats.kappa

    @property
    def delta_slope(self) -> float:
        if self.degenerate:
            return math.inf
        return self.sigma2 / (self.P_s * self.stats.sigma2_X)

    @property
    def xi_slope(self) -> float:
        if self.degenerate:
            return math.inf
        return self.P_a / (self.P_s * self.stats.sigma2_X)

    @cached_property
    def m_max(self) -> int:
        return poisson_truncation_index(self.stats.kappa, self.tail_eps)

    @cached_property
    def components(self) -> Components:
        return law_components(self.stats.Q_spectrum)


def eve_sinr_law(stats: ConditionalEveStats, P_s: float, P_a: float, sigma2: float, tail_eps: float = 1e-12) -> EveSinrLaw:
    return EveSinrLaw(stats, float(P_s), float(P_a), float(sigma2), tail_eps)


# ---------------------------------------------------------------------------
# Count-distribution kernels


def _nb_poisson_pmf(delta, q, log1m_q, order: int, kmax: int) -> np.ndarray:
    """pmf of ``Poisson(delta) + NegBin(order, q)`` on ``0..kmax``.

    Uses ``(k+1) p_{k+1} = (delta + order q + q k) p_k - delta q p_{k-1}``,
    carried in a rescaled form so that extreme ``delta`` does not underflow.
    """
    shape = np.broadcast(delta, q).shape
    delta = np.broadcast_to(delta, shape)
    q = np.broadcast_to(q, shape)
    out = np.empty(shape + (kmax + 1,))
    log_scale = -delta + order * np.broadcast_to(log1m_q, shape)
    out[..., 0] = np.exp(log_scale)
    lead = delta + order * q
    back = delta * q
    prev = np.zeros(shape)
    cur = np.ones(shape)
    for k in range(kmax):
        nxt = ((lead + q * k) * cur - back * prev) / (k + 1)
        nxt = np.maximum(nxt, 0.0)
        prev, cur = cur, nxt
        if np.max(cur, initial=0.0) > _RESCALE:
            f = np.where(cur > _RESCALE, cur, 1.0)
            cur = cur / f
            prev = prev / f
            log_scale = log_scale + np.log(f)
        out[..., k + 1] = cur * np.exp(log_scale)
    return out


def count_pmf_direct(delta, q_all: np.ndarray, kmax: int) -> np.ndarray:
    """pmf of ``Poisson(delta) + sum_i Geometric-type NB(1, q_i)`` by the
    all-positive recursion ``(k+1) p_{k+1} = sum_j d_j p_{k-j}``.

    ``d_0 = delta + sum_i q_i`` and ``d_j = sum_i q_i^(j+1)``.  Costs
    ``O(kmax^2)`` but never cancels, so it doubles as a reference.

    Parameters
    ----------
    delta : ndarray, shape (B,)
    q_all : ndarray, shape (B, n)
        Per-eigenvalue success probabilities, one row per batch element.
    """
    delta = np.asarray(delta, dtype=float).reshape(-1)
    q_all = np.asarray(q_all, dtype=float).reshape(delta.size, -1)
    B = delta.size
    powers = np.cumprod(np.repeat(q_all[:, None, :], kmax + 1, axis=1), axis=1)
    d = powers.sum(axis=2)
    d[:, 0] += delta
    log_p0 = -delta + np.sum(np.log1p(-q_all), axis=1)
    scaled = np.zeros((B, kmax + 1))
    scaled[:, 0] = 1.0
    log_scale = log_p0.copy()
    for k in range(kmax):
        nxt = np.einsum("bj,bj->b", d[:, : k + 1], scaled[:, k::-1]) / (k + 1)
        scaled[:, k + 1] = nxt
        big = nxt > _RESCALE
        if np.any(big):
            scaled[big, : k + 2] /= nxt[big, None]
            log_scale[big] += np.log(nxt[big])
    return scaled * np.exp(log_scale)[:, None]


def _count_pmf(t, a, b, comps: Components, kmax: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    delta = a * t
    xi = b * t
    if comps.direct:
        xl = xi.reshape(-1, 1) * comps.raw[None, :]
        q = xl / (1.0 + xl)
        flat = count_pmf_direct(np.broadcast_to(delta, t.shape).reshape(-1), q, kmax)
        return flat.reshape(t.shape + (kmax + 1,))
    total = None
    for lam, order, c in zip(comps.lam, comps.order, comps.coef):
        xl = xi * lam
        q = xl / (1.0 + xl)
        pmf = _nb_poisson_pmf(delta, q, -np.log1p(xl), int(order), kmax)
        total = c * pmf if total is None else total + c * pmf
    return total


def _poisson_weights(kappa, kmax: int) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    m = np.arange(kmax + 1)
    return np.exp(special.xlogy(m, kappa[..., None]) - kappa[..., None] - special.gammaln(m + 1))


def _truncation(kappa, tail_eps: float) -> int:
    return poisson_truncation_index(float(np.max(kappa, initial=0.0)), tail_eps)


def _fused_poisson_sum(t, kappa, a, b, comps: Components, kmax: int, density: bool) -> np.ndarray:
    """Stream the count recurrence and the Poisson(kappa) weights together.

    Survival accumulates ``sum_m w_m P(N <= m)``; density accumulates
    ``sum_m w_m (m+1) P(N = m+1)``.  Nothing of size ``kmax`` is stored.
    """
    delta = a * t
    xi = b * t
    last = kmax + 1 if density else kmax
    weights = [np.exp(special.xlogy(m, kappa) - kappa - special.gammaln(m + 1)) for m in range(kmax + 1)]
    total = np.zeros(t.shape)
    for lam, order, c in zip(comps.lam, comps.order, comps.coef):
        xl = xi * lam
        q = xl / (1.0 + xl)
        lead = delta + order * q
        back = delta * q
        log_scale = -delta - order * np.log1p(xl)
        scale = np.exp(log_scale)
        prev = np.zeros(t.shape)
        cur = np.ones(t.shape)
        cdf = np.zeros(t.shape)
        acc = np.zeros(t.shape)
        for k in range(last + 1):
            p_k = cur * scale
            if density:
                if k:
                    acc += weights[k - 1] * k * p_k
            else:
                cdf += p_k
                acc += weights[k] * cdf
            if k == last:
                break
            nxt = np.maximum(((lead + q * k) * cur - back * prev) / (k + 1), 0.0)
            prev, cur = cur, nxt
            big = cur > _RESCALE
            if np.any(big):
                f = np.where(big, cur, 1.0)
                cur = cur / f
                prev = prev / f
                log_scale = log_scale + np.log(f)
                scale = np.exp(log_scale)
        total += c * acc
    return total


def _poisson_mass(kappa, kmax: int) -> np.ndarray:
    """Mass of Poisson(kappa) on ``0..kmax``, used to renormalize the truncated weights."""
    return special.pdtr(kmax, kappa)


def survival_batch(t, kappa, a, b, comps: Components, tail_eps: float = 1e-12) -> np.ndarray:
    """``P(gamma_e > t)`` for arrays of thresholds and noncentralities.

    ``t``, ``kappa``, ``a`` and ``b`` broadcast against each other; the AN
    mixture ``comps`` is shared.  The truncated Poisson weights are
    renormalized, and ``t = 0`` returns exactly 1.
    """
    t, kappa, a, b = np.broadcast_arrays(
        np.asarray(t, float), np.asarray(kappa, float), np.asarray(a, float), np.asarray(b, float)
    )
    if t.size > _BUCKET:
        return _bucketed(survival_batch, t, kappa, a, b, comps, tail_eps)
    kmax = _truncation(kappa, tail_eps)
    if comps.direct:
        pmf = _count_pmf(t, a, b, comps, kmax)
        w = _poisson_weights(kappa, kmax)
        surv = np.sum(w * np.cumsum(pmf, axis=-1), axis=-1)
    else:
        surv = _fused_poisson_sum(t, kappa, a, b, comps, kmax, density=False)
    surv = np.clip(surv / _poisson_mass(kappa, kmax), 0.0, 1.0)
    return np.where(t == 0, 1.0, surv)


def _bucketed(fn, t, kappa, a, b, comps, tail_eps):
    """Evaluate large batches in noncentrality-sorted chunks so each chunk truncates at its own depth."""
    order = np.argsort(kappa, axis=None, kind="stable")
    out = np.empty(t.size)
    flat = [np.ravel(v) for v in (t, kappa, a, b)]
    for lo in range(0, t.size, _BUCKET):
        idx = order[lo : lo + _BUCKET]
        out[idx] = fn(*(v[idx] for v in flat), comps, tail_eps)
    return out.reshape(t.shape)


def density_batch(t, kappa, a, b, comps: Components, tail_eps: float = 1e-12) -> np.ndarray:
    """Exact density ``f(t) = (1/t) sum_m w_m (m+1) P(N = m+1)``; at ``t = 0`` it is ``e^-kappa (a + b E[Y])``."""
    t, kappa, a, b = np.broadcast_arrays(
        np.asarray(t, float), np.asarray(kappa, float), np.asarray(a, float), np.asarray(b, float)
    )
    if t.size > _BUCKET:
        return _bucketed(density_batch, t, kappa, a, b, comps, tail_eps)
    kmax = _truncation(kappa, tail_eps)
    if comps.direct:
        pmf = _count_pmf(t, a, b, comps, kmax + 1)
        w = _poisson_weights(kappa, kmax)
        m = np.arange(kmax + 1)
        raw = np.sum(w * (m + 1) * pmf[..., 1:], axis=-1)
    else:
        raw = _fused_poisson_sum(t, kappa, a, b, comps, kmax, density=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = raw / _poisson_mass(kappa, kmax) / t
    at_zero = np.exp(-kappa) * (a + b * comps.mean_y)
    return np.where(t == 0, at_zero, np.maximum(dens, 0.0))


# ---------------------------------------------------------------------------
# Literal series variants


def _divided_difference(phi, spectrum: EigenSpectrum, dps: int = 40) -> float:
    """Confluent divided difference of ``l^(n-1) phi(l)`` over the spectrum.

    For distinct eigenvalues this is ``sum_i a_i phi(l_i)`` with the
    partial-fraction coefficients; repeated eigenvalues use derivatives at
    elevated precision.  ``phi`` must accept mpmath numbers.
    """
    lam = [float(v) for v in spectrum.values]
    mult = [int(m) for m in spectrum.multiplicities]
    n = sum(mult)
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for i, (li, mi) in enumerate(zip(lam, mult)):

            def f(x, i=i):
                val = x ** (n - 1) * phi(x)
                for j, (lj, mj) in enumerate(zip(lam, mult)):
                    if j != i:
                        val /= (x - lj) ** mj
                return val

            li_mp = mpmath.mpf(li)
            if mi == 1:
                total += f(li_mp)
            else:
                total += mpmath.diff(f, li_mp, mi - 1) / mpmath.factorial(mi - 1)
        return float(total)


def _literal_series(t: float, law: EveSinrLaw, density: bool) -> float:
    spec = law.stats.Q_spectrum.positive_part()
    kappa = law.kappa
    a, b = law.delta_slope, law.xi_slope
    xi = b * t
    if spec.values.size == 0:
        lead = math.exp(-kappa - a * t)
        return lead * math.exp(kappa) * (a if density else 1.0)

    def phi(x):
        g = 1 / (1 + xi * x)
        val = mpmath.exp(kappa * g) * g
        if density:
            val = val * g * (a + b * x)
        return val

    if spec.is_simple:
        from ..statmath import partial_fraction_coefficients

        pf = partial_fraction_coefficients(spec.values, distinct_rel_tol=0.0)
        g = 1.0 / (1.0 + xi * pf.poles)
        inner = np.exp(kappa * g) * g
        if density:
            inner = inner * g * (a + b * pf.poles)
        d = float(np.dot(pf.coefficients, inner))
    else:
        d = _divided_difference(phi, spec)
    return math.exp(-kappa - a * t) * d


# ---------------------------------------------------------------------------
# Public evaluation


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError("t must be nonnegative")
    return arr


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


def eve_cdf(t, law: EveSinrLaw, variant: str = "exact"):
    """Conditional CDF ``P(gamma_e <= t | h_hat)``.

    Parameters
    ----------
    t : float or array_like
        Nonnegative thresholds.
    law : EveSinrLaw
    variant : {'exact', 'paper-eq48'}
        ``exact`` is the count-distribution form described in the module
        docstring.  ``paper-eq48`` is the literal single-sum Poisson series
        ``1 - e^{-kappa - delta} sum_m kappa^m/m! sum_i a_i (1 + xi l_i)^-(m+1)``,
        summed over ``m`` in closed form.  It coincides with ``exact`` only
        when ``kappa = 0``.
    """
    arr = _check_t(t)
    if variant not in CDF_VARIANTS:
        raise ValueError(f"variant must be one of {CDF_VARIANTS}")
    if law.degenerate:
        out = np.ones_like(arr)
    elif variant == "exact":
        out = 1.0 - survival_batch(arr, law.kappa, law.delta_slope, law.xi_slope, law.components, law.tail_eps)
    else:
        out = np.array([1.0 - _literal_series(float(x), law, False) if x > 0 else 0.0 for x in arr.reshape(-1)])
        out = out.reshape(arr.shape)
    return _scalar_or_array(out, t)


def eve_pdf(t, law: EveSinrLaw, variant: str = "exact-derivative"):
    """Conditional density of the eavesdropper SINR.

    ``exact-derivative`` is the analytic derivative of :func:`eve_cdf`.
    ``paper-eq63`` is the literal component series
    ``e^{-kappa - delta} sum_m kappa^m/m! sum_i a_i (a + b l_i) (1 + xi l_i)^-(m+2)``,
    which keeps only part of the derivative.  The two agree at ``t = 0``, and
    for every ``t`` when ``kappa = 0`` and one of the two slopes vanishes.
    """
    arr = _check_t(t)
    if variant not in PDF_VARIANTS:
        raise ValueError(f"variant must be one of {PDF_VARIANTS}")
    if law.degenerate:
        raise ValueError("degenerate law (P_s = 0) has no density")
    if variant == "exact-derivative":
        out = density_batch(arr, law.kappa, law.delta_slope, law.xi_slope, law.components, law.tail_eps)
    else:
        out = np.array([_literal_series(float(x), law, True) for x in arr.reshape(-1)]).reshape(arr.shape)
    return _scalar_or_array(out, t)
