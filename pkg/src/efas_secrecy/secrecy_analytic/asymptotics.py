"""High-SNR limits, the mean legitimate ceiling and the data/AN power split.

As ``P`` grows with the split fixed, ``gamma_b`` saturates at
``alpha x / (Omega_tilde (alpha + (1 - alpha)(M - 1)))`` and the eavesdropper
SINR converges to ``alpha |X|^2 / ((1 - alpha) Y)``, i.e. the same law with
the noise slope removed.  Without AN (``alpha = 1``) the eavesdropper SINR
grows without bound while Bob's stays finite, so the rate collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channel_model import SystemConfig, validate_config
from ..estimation import isotropic_variances
from .metrics import GL_NODES, SecrecyReport, _beta_e, _esr_core, esr
from .quadrature import golden_section_max

__all__ = [
    "AlphaOptimum",
    "HighSnrLimits",
    "alpha_proxy",
    "eve_moment_ratio",
    "high_snr_limits",
    "mean_ceiling",
    "optimize_alpha",
]


@dataclass(frozen=True)
class HighSnrLimits:
    """Limiting laws as ``P -> inf`` at a fixed split.

    Attributes
    ----------
    collapse : bool
        True when ``alpha = 1``: the ESR tends to zero.
    bob_gain : float
        ``gamma_b_inf = bob_gain * ||h_hat||^2`` (isotropic channels; ``inf`` on collapse).
    eve_xi_coef : float
        Limiting eavesdropper law has ``delta_slope = 0`` and
        ``xi_slope = eve_xi_coef / sigma2_X``.
    esr_inf : SecrecyReport
    """

    collapse: bool
    bob_gain: float
    eve_xi_coef: float
    esr_inf: SecrecyReport

    @property
    def value(self) -> float:
        return self.esr_inf.value


def high_snr_limits(cfg: SystemConfig, n_outer: int | None = None, outer: str = "auto", n_nodes: int = GL_NODES,
                    seed: int | None = None, workers: int = 1, mode: str | None = None) -> HighSnrLimits:
    """Limits of the legitimate SINR, the eavesdropper law and the ESR at high SNR."""
    cfg = validate_config(cfg)
    alpha = cfg.alpha
    _, omega_tilde = isotropic_variances(cfg.beta_b_dist.mean, cfg)
    if alpha == 1.0:
        return HighSnrLimits(True, math.inf, 0.0, SecrecyReport("esr-asymptotic", 0.0, "analytic"))
    if alpha == 0.0:
        return HighSnrLimits(False, 0.0, math.inf, SecrecyReport("esr-asymptotic", 0.0, "analytic"))
    bob_gain = alpha / (omega_tilde * (alpha + (1.0 - alpha) * (cfg.M - 1)))
    beta_e = _beta_e(cfg, mode)
    # unit total power with zero noise reproduces both limiting SINRs
    rep = _esr_core(cfg, beta_e, alpha, 1.0 - alpha, 0.0, "esr-asymptotic", n_outer, outer, n_nodes, seed, workers, 1e-8)
    return HighSnrLimits(False, bob_gain, (1.0 - alpha) / alpha, rep)


def mean_ceiling(alpha: float, cfg: SystemConfig, beta_b: float) -> float:
    """Mean of the high-SNR legitimate SINR, ``alpha M tp beta_b / (sigma2 (alpha + (1 - alpha)(M - 1)))``.

    Examples
    --------
    >>> mean_ceiling(0.5, SystemConfig(), 5.0)
    1000.0
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    M = cfg.M
    return alpha * M * cfg.pilot_snr * beta_b / (cfg.sigma2 * (alpha + (1.0 - alpha) * (M - 1)))


def eve_moment_ratio(cfg: SystemConfig, beta_e: float | None = None, n_mc: int = 20_000, seed: int | None = None) -> float:
    """``r = E|X|^2 / E[Y]`` averaged over the estimate.

    Closed form for isotropic channels; other configurations estimate both
    moments from the full Monte-Carlo pipeline.
    """
    cfg = validate_config(cfg)
    beta_e = cfg.effective_beta_e if beta_e is None else float(beta_e)
    if cfg.is_isotropic:
        beta_b = cfg.beta_b_dist.mean
        omega_hat, omega_tilde = isotropic_variances(beta_b, cfg)
        rho2 = cfg.rho**2
        resid = 1.0 - rho2 if cfg.variance_mode == "paper-approx" else 1.0 - rho2 + rho2 * omega_tilde / beta_b
        ex2 = beta_e * (resid + rho2 * cfg.M * omega_hat / beta_b)
        ey = (cfg.M - 1) * beta_e * resid
        return ex2 / ey
    from ..montecarlo import simulate_channel_statistics

    stats = simulate_channel_statistics(cfg.with_(beta_e=beta_e, beta_e_mode="fixed"), n_mc, seed=seed)
    return float(np.mean(stats.x2) / np.mean(stats.y))


def alpha_proxy(cfg: SystemConfig, form: str = "exact", ratio: float | None = None) -> float:
    """Closed-form split obtained from the mean high-SNR SINR ratio.

    Parameters
    ----------
    form : {'exact', 'approx'}
        ``exact`` is ``(M tp beta - (M-1) sigma2 r) / (M tp beta - (M-2) sigma2 r)``;
        ``approx`` its first-order version ``1 - sigma2 (M-1) r / (M tp beta)``.
    ratio : float, optional
        ``E|X|^2 / E[Y]``; computed by :func:`eve_moment_ratio` if omitted.

    The result is clipped into the open unit interval.
    """
    cfg = validate_config(cfg)
    r = eve_moment_ratio(cfg) if ratio is None else float(ratio)
    M = cfg.M
    big = M * cfg.pilot_snr * cfg.beta_b_dist.mean
    noise = cfg.sigma2 * r
    if form == "exact":
        val = (big - (M - 1) * noise) / (big - (M - 2) * noise)
    elif form == "approx":
        val = 1.0 - (M - 1) * noise / big
    else:
        raise ValueError("form must be 'exact' or 'approx'")
    eps = 1e-9
    return float(min(max(val, eps), 1.0 - eps))


@dataclass(frozen=True)
class AlphaOptimum:
    """Result of the split search.

    ``grid`` and ``grid_esr`` hold the coarse scan; ``degenerate`` is set when
    every scanned ESR is zero, in which case ``alpha_star`` is not meaningful.
    """

    alpha_star: float
    esr_star: float
    grid: np.ndarray = field(repr=False)
    grid_esr: np.ndarray = field(repr=False)
    proxy: float = float("nan")
    degenerate: bool = False


def optimize_alpha(cfg: SystemConfig, P: float | None = None, step: float = 0.02, width: float = 1e-3,
                   esr_kwargs: dict | None = None) -> AlphaOptimum:
    """Maximize the ESR over the data-power fraction.

    A coarse scan over ``[step, 1 - step]`` (plus the closed-form proxy when
    it falls inside the scan range) locates the best cell; golden-section
    search then refines within the neighbouring cells to ``width``.
    """
    cfg = validate_config(cfg)
    if P is not None:
        if P <= 0:
            raise ValueError("P must be > 0")
        cfg = cfg.with_(P=float(P))
    kw = dict(esr_kwargs or {})

    def value(a: float) -> float:
        return esr(cfg.with_(alpha=float(a)), **kw).value

    grid = np.round(np.arange(step, 1.0 - step / 2, step), 12)
    vals = np.array([value(a) for a in grid])
    proxy = alpha_proxy(cfg)
    cand_a, cand_v = list(grid), list(vals)
    if grid[0] < proxy < grid[-1]:
        cand_a.append(proxy)
        cand_v.append(value(proxy))
    if np.max(vals) <= 0:
        return AlphaOptimum(float("nan"), 0.0, grid, vals, proxy, True)
    i = int(np.argmax(cand_v))
    a0 = cand_a[i]
    lo, hi = max(a0 - step, 0.0), min(a0 + step, 1.0)
    a_ref, v_ref = golden_section_max(value, lo, hi, width)
    if v_ref >= cand_v[i]:
        return AlphaOptimum(float(a_ref), float(v_ref), grid, vals, proxy)
    return AlphaOptimum(float(a0), float(cand_v[i]), grid, vals, proxy)
