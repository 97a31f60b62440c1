"""Secrecy outage probability and ergodic secrecy rate.

Both metrics average a conditional quantity over the channel estimate.  In
the isotropic setting (``R_b = R_e = C = I``) the conditional law depends on
the estimate only through ``x = ||h_hat||^2 ~ Omega_hat * Gamma(M)``, and
after rescaling ``Y`` by ``sigma2_X`` every law shares one unit Erlang AN
term.  That lets whole batches of outer samples (or quadrature nodes) run
through the vectorized kernels at once.  Other configurations fall back to a
per-sample loop over the general conditional statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..beamforming import eve_conditional_distribution, isotropic_eve_stats, mrt_and_null_space
from ..channel_model import SystemConfig, validate_config
from ..estimation import isotropic_variances, mmse_filter, prelog_and_threshold
from ..statmath import EigenSpectrum, gauss_laguerre, psd_sqrt, sample_standard_complex_gaussian
from ..streams import TAG_OUTER, run_blocks
from .eve_law import Components, EveSinrLaw, eve_sinr_law, law_components, survival_batch
from .quadrature import adaptive_gk15

__all__ = [
    "G_TOL",
    "METHODS",
    "METRICS",
    "SOP_OUTER_DEFAULT",
    "ESR_OUTER_DEFAULT",
    "SecrecyReport",
    "conditional_secrecy_G",
    "conditional_sop",
    "esr",
    "induced_threshold",
    "sop",
]

METRICS = ("sop", "sop-worst-case", "esr", "esr-asymptotic")
METHODS = ("analytic", "hybrid", "monte-carlo")
SOP_OUTER_DEFAULT = 10_000
ESR_OUTER_DEFAULT = 10_000
G_TOL = 1e-8
GL_NODES = 20
LN2 = math.log(2.0)


@dataclass(frozen=True)
class SecrecyReport:
    """Value of a secrecy metric with its provenance.

    ``stderr`` is the outer-sampling standard error and ``ci_halfwidth`` the
    corresponding 95% half-width; both are 0 for quadrature results.
    """

    metric: str
    value: float
    method: str
    ci_halfwidth: float = 0.0
    n_outer: int = 0
    stderr: float = 0.0

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not math.isfinite(self.value):
            raise ValueError("metric value must be finite")
        if self.metric.startswith("sop") and not 0.0 <= self.value <= 1.0:
            raise ValueError("SOP must lie in [0, 1]")
        if self.metric.startswith("esr") and self.value < 0:
            raise ValueError("ESR must be nonnegative")
        if self.method != "analytic" and not self.ci_halfwidth > 0:
            raise ValueError("sampled estimates need a positive confidence half-width")


def _report(metric: str, samples: np.ndarray) -> SecrecyReport:
    n = samples.size
    value = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    # a constant sample still carries resolution uncertainty of order 1/n
    half = 1.96 * stderr if stderr > 0 else 1.96 / n
    if metric.startswith("sop"):
        value = min(max(value, 0.0), 1.0)
    return SecrecyReport(metric, value, "hybrid", half, n, stderr)


# ---------------------------------------------------------------------------
# Conditional quantities


def induced_threshold(gamma_b, theta: float):
    """Eavesdropper SINR above which the secrecy rate misses the target: ``(gamma_b + 1)/theta - 1``."""
    if theta < 1:
        raise ValueError("theta must be >= 1")
    out = (np.asarray(gamma_b, dtype=float) + 1.0) / theta - 1.0
    return float(out) if np.ndim(out) == 0 else out


def conditional_sop(gamma_b: float, theta: float, law: EveSinrLaw) -> float:
    """Outage probability given the estimate: ``P(gamma_e > t_b)``, or 1 when ``t_b < 0``."""
    t_b = induced_threshold(gamma_b, theta)
    if t_b < 0:
        return 1.0
    if law.degenerate:
        return 0.0
    return float(survival_batch(t_b, law.kappa, law.delta_slope, law.xi_slope, law.components, law.tail_eps))


def _G_batch(gamma_star, kappa, a, b, comps: Components, tol: float = G_TOL, tail_eps: float = 1e-12):
    """``(1/ln2) int_0^{gamma*} F(t)/(1+t) dt`` for many laws sharing ``comps``.

    Integrates in ``u = log(1 + t)`` so that ``dt / (1 + t) = du``.
    """
    gamma_star = np.asarray(gamma_star, dtype=float).reshape(-1)
    kappa, a, b = (np.broadcast_to(np.asarray(v, dtype=float), gamma_star.shape) for v in (kappa, a, b))

    def integrand(owner, u):
        t = np.expm1(u)
        return 1.0 - survival_batch(t, kappa[owner], a[owner], b[owner], comps, tail_eps)

    vals, _ = adaptive_gk15(integrand, np.log1p(gamma_star), tol=tol * LN2)
    return vals / LN2


def conditional_secrecy_G(gamma_b_star: float, law: EveSinrLaw, tol: float = G_TOL) -> float:
    """Conditional ergodic secrecy rate before the pre-log factor.

    ``G = int_0^{g*} log2((1+g*)/(1+t)) f(t) dt = (1/ln2) int_0^{g*} F(t)/(1+t) dt``.
    """
    g = float(gamma_b_star)
    if g < 0:
        raise ValueError("gamma_b_star must be >= 0")
    if g == 0:
        return 0.0
    if law.degenerate:
        return math.log2(1.0 + g)
    out = _G_batch([g], law.kappa, law.delta_slope, law.xi_slope, law.components, tol, law.tail_eps)
    return float(out[0])


# ---------------------------------------------------------------------------
# Outer averaging machinery


@lru_cache(maxsize=64)
def unit_components(n_an: int) -> Components:
    """AN term ``Gamma(n_an, 1)`` shared by all isotropic laws after rescaling."""
    return law_components(EigenSpectrum([1.0], [n_an]))


def isotropic_terms(cfg: SystemConfig, beta_b, nh2, beta_e: float, P_s: float, P_a: float, sigma2: float):
    """Legitimate SINR and rescaled eavesdropper-law parameters for isotropic channels.

    Returns ``(gamma_b, kappa, a, b)`` where the eavesdropper law uses a unit
    Erlang(M-1) AN term with slopes ``a`` and ``b``.  ``sigma2 = 0`` gives the
    high-SNR limit.
    """
    beta_b = np.asarray(beta_b, dtype=float)
    nh2 = np.asarray(nh2, dtype=float)
    _, omega_tilde = isotropic_variances(beta_b, cfg)
    gamma_b = P_s * nh2 / (omega_tilde * (P_s + P_a * (cfg.M - 1)) + sigma2)
    kappa, s2 = isotropic_eve_stats(nh2, beta_b, beta_e, cfg)
    a = sigma2 / (P_s * s2)
    b = np.full_like(kappa, P_a / P_s)
    return gamma_b, kappa, a, b


@dataclass(frozen=True, eq=False)
class _Outer:
    """General-configuration outer sample: estimate, its error covariance and beta_b."""

    h_hat: np.ndarray
    R_tilde: np.ndarray
    beta_b: float


def _general_terms(cfg: SystemConfig, s: _Outer, beta_e: float, P_s: float, P_a: float, sigma2: float):
    design = mrt_and_null_space(s.h_hat)
    stats = eve_conditional_distribution(s.h_hat, s.beta_b, beta_e, cfg, design)
    R = s.R_tilde
    self_leak = float(np.real(np.vdot(design.w, R @ design.w)))
    an_leak = float(np.real(np.trace(R))) - self_leak
    gain = float(np.real(np.vdot(s.h_hat, s.h_hat)))
    gamma_b = P_s * gain / (P_s * self_leak + P_a * an_leak + sigma2)
    return gamma_b, eve_sinr_law(stats, P_s, P_a, sigma2)


def _draw_outer(cfg: SystemConfig, rng: np.random.Generator, size: int):
    """Outer draws of ``(beta_b, h_hat)``; isotropic configs only need ``||h_hat||^2``."""
    beta_b = np.asarray(cfg.beta_b_dist.sample(rng, size), dtype=float)
    z = sample_standard_complex_gaussian(cfg.M, rng, size)
    if cfg.is_isotropic:
        omega_hat, _ = isotropic_variances(beta_b, cfg)
        return beta_b, omega_hat * np.sum(np.abs(z) ** 2, axis=1)
    out = []
    cache = {}
    for bb, zz in zip(beta_b, z):
        key = float(bb)
        if key not in cache:
            filt = mmse_filter(key * cfg.R_b_matrix, cfg)
            cache[key] = (psd_sqrt(filt.R_hat, "R_hat"), filt.R_tilde)
        root, R_tilde = cache[key]
        out.append(_Outer(root @ zz, R_tilde, key))
    return beta_b, out


def _outer_values(cfg: SystemConfig, n: int, seed: int, workers: int, iso_fn, gen_fn) -> np.ndarray:
    def block(rng, size, start):
        beta_b, draws = _draw_outer(cfg, rng, size)
        if cfg.is_isotropic:
            return iso_fn(beta_b, draws)
        return np.array([gen_fn(s) for s in draws])

    parts = run_blocks(block, n, seed, TAG_OUTER, workers)
    return np.concatenate(parts)


def _beta_e(cfg: SystemConfig, mode: str | None) -> float:
    if mode is None:
        return cfg.effective_beta_e
    if mode == "worst-case":
        return max(cfg.beta_e_set)
    if mode == "fixed-beta_e":
        return float(cfg.beta_e)
    raise ValueError("mode must be 'fixed-beta_e' or 'worst-case'")


# ---------------------------------------------------------------------------
# SOP


def sop(
    cfg: SystemConfig,
    mode: str = "worst-case",
    n_outer: int = SOP_OUTER_DEFAULT,
    seed: int | None = None,
    workers: int = 1,
) -> SecrecyReport:
    """Hybrid SOP: outer sampling of ``(beta_b, h_hat)``, exact conditional outage inside.

    Parameters
    ----------
    cfg : SystemConfig
    mode : {'worst-case', 'fixed-beta_e'}
        Worst case evaluates at the upper end of ``beta_e_set``.
    n_outer : int
        Number of outer samples.
    seed : int, optional
        Defaults to ``cfg.seed``.

    Notes
    -----
    The conditional law treats ``X`` and the AN-subspace term as independent
    with a centered AN term.  That holds for isotropic channels and for any
    correlation that commutes with the beamformer geometry; otherwise the
    result is an approximation (see ``ConditionalEveStats.is_exact``) and
    the full pipeline in :mod:`efas_secrecy.montecarlo` is the reference.
    """
    cfg = validate_config(cfg)
    beta_e = _beta_e(cfg, mode)
    metric = "sop-worst-case" if mode == "worst-case" else "sop"
    seed = cfg.seed if seed is None else int(seed)
    _, theta = prelog_and_threshold(cfg)
    P_s, P_a, s2 = cfg.P_s, cfg.P_a, cfg.sigma2
    if P_s == 0:
        return _report(metric, np.ones(int(n_outer)))

    def iso(beta_b, nh2):
        gamma_b, kappa, a, b = isotropic_terms(cfg, beta_b, nh2, beta_e, P_s, P_a, s2)
        t_b = induced_threshold(gamma_b, theta)
        out = np.ones_like(t_b)
        ok = t_b >= 0
        if np.any(ok):
            out[ok] = survival_batch(t_b[ok], kappa[ok], a[ok], b[ok], unit_components(cfg.M - 1))
        return out

    def gen(s):
        gamma_b, law = _general_terms(cfg, s, beta_e, P_s, P_a, s2)
        return conditional_sop(gamma_b, theta, law)

    return _report(metric, _outer_values(cfg, n_outer, seed, workers, iso, gen))


# ---------------------------------------------------------------------------
# ESR


def _esr_core(cfg, beta_e, P_s, P_a, s2, metric, n_outer, outer, n_nodes, seed, workers, tol):
    eta, _ = prelog_and_threshold(cfg)
    if outer not in ("auto", "quadrature", "monte-carlo"):
        raise ValueError("outer must be 'auto', 'quadrature' or 'monte-carlo'")
    quad_ok = cfg.is_isotropic and cfg.beta_b_dist.is_point_mass
    if outer == "quadrature" and not quad_ok:
        raise ValueError("quadrature outer averaging needs isotropic channels and a point-mass beta_b")
    use_quad = quad_ok if outer == "auto" else outer == "quadrature"
    comps = unit_components(cfg.M - 1)

    def iso(beta_b, nh2):
        gamma_b, kappa, a, b = isotropic_terms(cfg, beta_b, nh2, beta_e, P_s, P_a, s2)
        return eta * _G_batch(gamma_b, kappa, a, b, comps, tol)

    if use_quad:
        rule = gauss_laguerre(n_nodes, cfg.M - 1)
        beta_b = cfg.beta_b_dist.mean
        omega_hat, _ = isotropic_variances(beta_b, cfg)
        vals = iso(np.full(n_nodes, beta_b), omega_hat * rule.nodes)
        return SecrecyReport(metric, max(float(np.dot(rule.weights, vals)), 0.0), "analytic")

    def gen(s):
        gamma_b, law = _general_terms(cfg, s, beta_e, P_s, P_a, s2)
        return eta * conditional_secrecy_G(gamma_b, law, tol)

    seed = cfg.seed if seed is None else int(seed)
    n = ESR_OUTER_DEFAULT if n_outer is None else int(n_outer)
    return _report(metric, _outer_values(cfg, n, seed, workers, iso, gen))


def esr(
    cfg: SystemConfig,
    n_outer: int | None = None,
    outer: str = "auto",
    n_nodes: int = GL_NODES,
    seed: int | None = None,
    workers: int = 1,
    tol: float = G_TOL,
    mode: str | None = None,
) -> SecrecyReport:
    """Ergodic secrecy rate ``eta * E[G(gamma_b, law)]``.

    Parameters
    ----------
    cfg : SystemConfig
    n_outer : int, optional
        Outer sample count for Monte-Carlo averaging.
    outer : {'auto', 'quadrature', 'monte-carlo'}
        ``auto`` uses an ``n_nodes`` generalized Gauss-Laguerre rule over
        ``||h_hat||^2 ~ Omega_hat Gamma(M)`` when the channels are isotropic
        and ``beta_b`` is fixed, and outer Monte-Carlo otherwise.
    mode : {'fixed-beta_e', 'worst-case'}, optional
        Eavesdropper gain used in the evaluation; defaults to ``cfg.beta_e_mode``.

    The same caveat as :func:`sop` applies to anisotropic correlation.
    """
    cfg = validate_config(cfg)
    beta_e = _beta_e(cfg, mode)
    if cfg.alpha == 0:
        return SecrecyReport("esr", 0.0, "analytic")
    return _esr_core(cfg, beta_e, cfg.P_s, cfg.P_a, cfg.sigma2, "esr", n_outer, outer, n_nodes, seed, workers, tol)
