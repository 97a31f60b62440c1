"""Full-pipeline Monte-Carlo oracle.

Each draw runs routing gain, small-scale fading, pilot observation, MMSE
estimation, MRT/null-space design and both SINRs.  Batches store the
power-independent sufficient statistics, so a single set of draws serves
every ``(P, alpha)`` pair with common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamforming import (
    bob_sinr,
    eve_conditional_moments,
    eve_sinr_realization,
    mrt_and_null_space,
)
from .channel_model import SystemConfig, assemble_channels, draw_small_scale, validate_config
from .estimation import mmse_estimate, mmse_filter, pilot_observe, prelog_and_threshold
from .statmath import psd_sqrt, sample_standard_complex_gaussian
from .streams import (
    BLOCK_SIZE,
    TAG_CONDITIONAL,
    TAG_ESTIMATE,
    TAG_PIPELINE,
    block_stream,
    run_blocks,
    split_streams,
)

__all__ = [
    "BLOCK_SIZE",
    "ChannelStatistics",
    "McEstimate",
    "SinrPair",
    "conditional_eve_channels",
    "conditional_eve_samples",
    "empirical_conditional_cdf",
    "empirical_esr",
    "empirical_sop",
    "fixed_estimate",
    "simulate_channel_statistics",
    "simulate_sinr_pair",
    "split_streams",
]

CDF_DRAWS_DEFAULT = 1_000_000
SWEEP_DRAWS_DEFAULT = 100_000
MIN_DRAWS = 10_000


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo estimate with its standard error and stream provenance."""

    value: float
    stderr: float
    n: int
    seed: int
    stream_layout: tuple


def binomial_stderr(k, n: int):
    """Standard error of a frequency, using ``(k + 1/2)/(n + 1)`` so zero counts stay positive."""
    p = (np.asarray(k, dtype=float) + 0.5) / (n + 1.0)
    return np.sqrt(p * (1.0 - p) / n)


def _layout(n: int, workers: int) -> tuple:
    workers = max(1, int(workers))
    return (workers, int(math.ceil(n / workers)))


# ---------------------------------------------------------------------------
# Single realization


@dataclass(frozen=True)
class SinrPair:
    """One coherence block: effective and raw legitimate SINR, eavesdropper SINR and diagnostics."""

    gamma_b: float
    gamma_e: float
    gamma_b_raw: float
    omega_tilde: float
    an_leakage_bob: float
    beta_b: float
    beta_e: float
    resamples: int = 0


def simulate_sinr_pair(cfg: SystemConfig, stream: np.random.Generator, beta_e: float | None = None) -> SinrPair:
    """Run the whole chain once with the scalar per-realization operations."""
    cfg = validate_config(cfg)
    beta_e = cfg.effective_beta_e if beta_e is None else float(beta_e)
    resamples = 0
    while True:
        beta_b = float(cfg.beta_b_dist.sample(stream))
        g_b, g_e = draw_small_scale(cfg, stream)
        ch = assemble_channels(g_b, g_e, beta_b, beta_e, cfg)
        y = pilot_observe(ch.h_b, cfg, stream)
        est = mmse_estimate(y, beta_b * cfg.R_b_matrix, cfg)
        if np.linalg.norm(est.h_hat) > 0:
            break
        resamples += 1
    design = mrt_and_null_space(est.h_hat)
    P_s, P_a, s2 = cfg.P_s, cfg.P_a, cfg.sigma2
    gamma_b = bob_sinr(est.h_hat, est.R_tilde, P_s, P_a, s2, design)
    gamma_e = eve_sinr_realization(ch.h_e, design, P_s, P_a, s2)
    hb_w2 = abs(np.vdot(ch.h_b, design.w)) ** 2
    hb_v2 = float(np.sum(np.abs(design.V.conj().T @ ch.h_b) ** 2))
    an_leak = P_a * hb_v2
    omega_tilde = float(np.real(np.trace(est.R_tilde))) / cfg.M
    return SinrPair(gamma_b, gamma_e, P_s * hb_w2 / (an_leak + s2), omega_tilde, an_leak, beta_b, beta_e, resamples)


# ---------------------------------------------------------------------------
# Batched pipeline


@dataclass(frozen=True, eq=False)
class ChannelStatistics:
    """Power-independent per-draw statistics in block order.

    Attributes
    ----------
    nh2 : ``||h_hat||^2``
    self_leak, an_leak : ``w^H R_tilde w`` and ``tr(R_tilde) - w^H R_tilde w``
    x2, y : ``|h_e^H w|^2`` and ``||V^H h_e||^2``
    hb_w2, hb_v2 : the same projections of the true legitimate channel
    """

    nh2: np.ndarray
    self_leak: np.ndarray
    an_leak: np.ndarray
    x2: np.ndarray
    y: np.ndarray
    hb_w2: np.ndarray
    hb_v2: np.ndarray
    beta_b: np.ndarray
    beta_e: float
    seed: int
    layout: tuple
    resamples: int = 0

    @property
    def n(self) -> int:
        return int(self.nh2.size)

    def sinr(self, P_s: float, P_a: float, sigma2: float):
        """Effective legitimate SINR and eavesdropper SINR for every draw."""
        gamma_b = P_s * self.nh2 / (P_s * self.self_leak + P_a * self.an_leak + sigma2)
        gamma_e = P_s * self.x2 / (P_a * self.y + sigma2)
        return gamma_b, gamma_e

    def raw_gamma_b(self, P_s: float, P_a: float, sigma2: float) -> np.ndarray:
        return P_s * self.hb_w2 / (P_a * self.hb_v2 + sigma2)


def _estimate_batch(cfg: SystemConfig, beta_b: np.ndarray, y: np.ndarray):
    """MMSE estimates and error covariances for a batch with per-draw ``beta_b``.

    Returns ``(h_hat, R_tilde)`` where ``R_tilde`` is either one matrix or,
    for random routing gains, a callable giving ``w^H R w`` and ``tr R``.
    """
    if cfg.beta_b_dist.is_point_mass:
        filt = mmse_filter(float(beta_b[0]) * cfg.R_b_matrix, cfg)
        return y @ filt.A.T, filt.R_tilde
    tp, s2 = cfg.pilot_snr, cfg.sigma2
    r, U = np.linalg.eigh(cfg.R_b_matrix)
    r = np.clip(r, 0.0, None)
    br = beta_b[:, None] * r[None, :]
    gain = math.sqrt(tp) * br / (tp * br + s2)
    err = br * s2 / (tp * br + s2)
    h_hat = ((y @ U.conj()) * gain) @ U.T
    return h_hat, (U, err)


def _pipeline_block(cfg: SystemConfig, beta_e: float, rng: np.random.Generator, size: int):
    beta_b = np.asarray(cfg.beta_b_dist.sample(rng, size), dtype=float)
    g_b, g_e = draw_small_scale(cfg, rng, size)
    ch = assemble_channels(g_b, g_e, beta_b, beta_e, cfg)
    y = pilot_observe(ch.h_b, cfg, rng)
    h_hat, R = _estimate_batch(cfg, beta_b, y)
    nh2 = np.sum(np.abs(h_hat) ** 2, axis=1)
    bad = np.flatnonzero(~(nh2 > 0))
    if bad.size:
        # probability-zero event; redraw the affected rows from the same stream
        sub = _pipeline_block(cfg, beta_e, rng, bad.size)
        out = _assemble(cfg, ch.h_b, ch.h_e, h_hat, nh2, R, beta_b)
        for key, val in out.items():
            val[bad] = sub[key]
        out["resamples"] = bad.size + sub["resamples"]
        return out
    out = _assemble(cfg, ch.h_b, ch.h_e, h_hat, nh2, R, beta_b)
    out["resamples"] = 0
    return out


def _assemble(cfg, h_b, h_e, h_hat, nh2, R, beta_b):
    safe = np.where(nh2 > 0, nh2, 1.0)
    w = h_hat / np.sqrt(safe)[:, None]
    if isinstance(R, tuple):
        U, err = R
        wu = np.abs(w @ U.conj()) ** 2
        self_leak = np.sum(wu * err, axis=1)
        trace = np.sum(err, axis=1)
    else:
        self_leak = np.real(np.einsum("ni,ij,nj->n", w.conj(), R, w))
        trace = np.full(nh2.shape, float(np.real(np.trace(R))))
    x2 = np.abs(np.sum(h_e.conj() * w, axis=1)) ** 2
    y = np.maximum(np.sum(np.abs(h_e) ** 2, axis=1) - x2, 0.0)
    hb_w2 = np.abs(np.sum(h_b.conj() * w, axis=1)) ** 2
    hb_v2 = np.maximum(np.sum(np.abs(h_b) ** 2, axis=1) - hb_w2, 0.0)
    return {
        "nh2": nh2,
        "self_leak": self_leak,
        "an_leak": np.maximum(trace - self_leak, 0.0),
        "x2": x2,
        "y": y,
        "hb_w2": hb_w2,
        "hb_v2": hb_v2,
        "beta_b": np.asarray(beta_b, dtype=float),
    }


def simulate_channel_statistics(cfg: SystemConfig, n: int = SWEEP_DRAWS_DEFAULT, seed: int | None = None,
                                workers: int = 1, beta_e: float | None = None) -> ChannelStatistics:
    """Draw ``n`` coherence blocks and keep the statistics needed for any power split."""
    cfg = validate_config(cfg)
    seed = cfg.seed if seed is None else int(seed)
    beta_e = cfg.effective_beta_e if beta_e is None else float(beta_e)
    parts = run_blocks(lambda rng, size, start: _pipeline_block(cfg, beta_e, rng, size), n, seed, TAG_PIPELINE, workers)
    keys = ("nh2", "self_leak", "an_leak", "x2", "y", "hb_w2", "hb_v2", "beta_b")
    cat = {k: np.concatenate([p[k] for p in parts]) for k in keys}
    return ChannelStatistics(**cat, beta_e=beta_e, seed=seed, layout=_layout(n, workers),
                             resamples=sum(p["resamples"] for p in parts))


def _stats_for(cfg, n, seed, workers, stats):
    if stats is not None:
        return stats
    if n < MIN_DRAWS:
        raise ValueError(f"need at least {MIN_DRAWS} draws")
    return simulate_channel_statistics(cfg, n, seed, workers)


def empirical_sop(cfg: SystemConfig, n: int = SWEEP_DRAWS_DEFAULT, seed: int | None = None, workers: int = 1,
                  stats: ChannelStatistics | None = None) -> McEstimate:
    """Frequency of ``eta [log2(1+gamma_b) - log2(1+gamma_e)]^+ < R_th``."""
    cfg = validate_config(cfg)
    st = _stats_for(cfg, n, seed, workers, stats)
    eta, theta = prelog_and_threshold(cfg)
    gb, ge = st.sinr(cfg.P_s, cfg.P_a, cfg.sigma2)
    # R_s < R_th  <=>  (1+gb)/(1+ge) < theta, also covering R_th = 0 with gb <= ge
    if cfg.R_th == 0:
        outage = gb <= ge
    else:
        outage = (1.0 + gb) < theta * (1.0 + ge)
    k = int(np.count_nonzero(outage))
    return McEstimate(k / st.n, float(binomial_stderr(k, st.n)), st.n, st.seed, st.layout)


def empirical_esr(cfg: SystemConfig, n: int = SWEEP_DRAWS_DEFAULT, seed: int | None = None, workers: int = 1,
                  stats: ChannelStatistics | None = None) -> McEstimate:
    """Sample mean of ``eta [log2(1+gamma_b) - log2(1+gamma_e)]^+``."""
    cfg = validate_config(cfg)
    st = _stats_for(cfg, n, seed, workers, stats)
    eta, _ = prelog_and_threshold(cfg)
    gb, ge = st.sinr(cfg.P_s, cfg.P_a, cfg.sigma2)
    rs = eta * np.maximum(np.log2(1.0 + gb) - np.log2(1.0 + ge), 0.0)
    return McEstimate(float(np.mean(rs)), float(np.std(rs, ddof=1) / math.sqrt(st.n)), st.n, st.seed, st.layout)


# ---------------------------------------------------------------------------
# Conditional oracle


def fixed_estimate(cfg: SystemConfig, seed: int | None = None, beta_b: float | None = None) -> np.ndarray:
    """A reproducible channel estimate drawn from its marginal law ``CN(0, R_hat)``."""
    cfg = validate_config(cfg)
    seed = cfg.seed if seed is None else int(seed)
    beta_b = cfg.beta_b_dist.mean if beta_b is None else float(beta_b)
    filt = mmse_filter(beta_b * cfg.R_b_matrix, cfg)
    z = sample_standard_complex_gaussian(cfg.M, block_stream(seed, TAG_ESTIMATE, 0))
    return psd_sqrt(filt.R_hat, "R_hat") @ z


def _conditional_channel_sampler(cfg: SystemConfig, h_hat: np.ndarray, beta_b: float, beta_e: float):
    """Block function drawing ``h_e`` given the estimate.

    In ``exact-conditional`` mode ``g_b`` is drawn from its posterior by the
    conditioning update ``g = g' + K (h_hat - h_hat')`` on an independent
    prior draw ``g'`` with its own simulated estimate ``h_hat'``, then pushed
    through the leakage model; the closed-form conditional covariance is
    never used.  ``paper-approx`` draws ``h_e`` from the approximate Gaussian
    law directly.
    """
    mom = eve_conditional_moments(h_hat, beta_b, beta_e, cfg)
    M = cfg.M
    filt = mmse_filter(beta_b * cfg.R_b_matrix, cfg)
    rb_half = psd_sqrt(cfg.R_b_matrix, "R_b")
    re_half = psd_sqrt(cfg.R_e_matrix, "R_e")
    gain = mom.cross @ mom.R_hat_pinv
    C = cfg.C_matrix
    rho = cfg.rho
    scale_p = math.sqrt(cfg.pilot_snr * beta_b)
    noise_sd = math.sqrt(cfg.sigma2)
    cov_root = psd_sqrt(mom.cov_e, "R_e|b") if cfg.variance_mode == "paper-approx" else None

    def draw(rng, size):
        if cov_root is not None:
            z = sample_standard_complex_gaussian(M, rng, size)
            return mom.mean_e[None, :] + z @ cov_root.T
        g_prior = sample_standard_complex_gaussian(M, rng, size)
        noise = sample_standard_complex_gaussian(M, rng, size)
        h_prior = (scale_p * (g_prior @ rb_half.T) + noise_sd * noise) @ filt.A.T
        g_post = g_prior + (h_hat[None, :] - h_prior) @ gain.T
        u = sample_standard_complex_gaussian(M, rng, size)
        g_e = rho * (g_post @ C.T) + math.sqrt(1.0 - rho**2) * u
        return math.sqrt(beta_e) * (g_e @ re_half.T)

    return draw


def _conditional_setup(cfg, h_hat, beta_b, beta_e, seed):
    cfg = validate_config(cfg)
    seed = cfg.seed if seed is None else int(seed)
    beta_b = cfg.beta_b_dist.mean if beta_b is None else float(beta_b)
    beta_e = cfg.effective_beta_e if beta_e is None else float(beta_e)
    h_hat = np.asarray(h_hat, dtype=complex).reshape(-1)
    return cfg, h_hat, _conditional_channel_sampler(cfg, h_hat, beta_b, beta_e), seed


def conditional_eve_channels(cfg: SystemConfig, h_hat, n: int, beta_b: float | None = None,
                             beta_e: float | None = None, seed: int | None = None, workers: int = 1) -> np.ndarray:
    """``n x M`` eavesdropper channel draws from their law given ``h_hat``."""
    cfg, h_hat, draw, seed = _conditional_setup(cfg, h_hat, beta_b, beta_e, seed)
    return np.concatenate(run_blocks(lambda rng, size, start: draw(rng, size), n, seed, TAG_CONDITIONAL, workers))


def conditional_eve_samples(cfg: SystemConfig, h_hat, n: int = CDF_DRAWS_DEFAULT, beta_b: float | None = None,
                            beta_e: float | None = None, seed: int | None = None, workers: int = 1) -> np.ndarray:
    """Eavesdropper SINR draws with the estimate held fixed (same streams as :func:`conditional_eve_channels`)."""
    cfg, h_hat, draw, seed = _conditional_setup(cfg, h_hat, beta_b, beta_e, seed)
    w = mrt_and_null_space(h_hat).w
    P_s, P_a, s2 = cfg.P_s, cfg.P_a, cfg.sigma2

    def block(rng, size, start):
        h_e = draw(rng, size)
        x2 = np.abs(h_e.conj() @ w) ** 2
        y = np.maximum(np.sum(np.abs(h_e) ** 2, axis=1) - x2, 0.0)
        return P_s * x2 / (P_a * y + s2)

    return np.concatenate(run_blocks(block, n, seed, TAG_CONDITIONAL, workers))


def empirical_conditional_cdf(cfg: SystemConfig, h_hat, grid, n: int = CDF_DRAWS_DEFAULT, beta_b: float | None = None,
                              beta_e: float | None = None, seed: int | None = None, workers: int = 1,
                              samples: np.ndarray | None = None) -> list[McEstimate]:
    """Empirical ``P(gamma_e <= t | h_hat)`` at every grid point with binomial standard errors."""
    if samples is None:
        if n < MIN_DRAWS:
            raise ValueError(f"need at least {MIN_DRAWS} draws")
        samples = conditional_eve_samples(cfg, h_hat, n, beta_b, beta_e, seed, workers)
    n = samples.size
    srt = np.sort(samples)
    grid = np.asarray(grid, dtype=float)
    counts = np.searchsorted(srt, grid, side="right")
    seed = validate_config(cfg).seed if seed is None else int(seed)
    layout = _layout(n, workers)
    return [McEstimate(float(k / n), float(binomial_stderr(k, n)), n, seed, layout) for k in counts]

