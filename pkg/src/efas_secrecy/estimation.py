"""Uplink pilot training and linear MMSE estimation of the legitimate channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .channel_model import SystemConfig
from .statmath import check_hermitian, sample_standard_complex_gaussian

__all__ = [
    "EstimationResult",
    "MmseFilter",
    "isotropic_variances",
    "mmse_estimate",
    "mmse_filter",
    "pilot_observe",
    "prelog_and_threshold",
]


@dataclass(frozen=True, eq=False)
class MmseFilter:
    """Linear MMSE filter ``A`` with estimate and error covariances."""

    A: np.ndarray
    R_hat: np.ndarray
    R_tilde: np.ndarray


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """MMSE estimate with its covariances.

    ``omega_hat`` is the per-entry estimate variance (``tr(R_hat) / M``).
    ``omega_tilde`` is only set when ``R_hb`` is a scaled identity.
    """

    h_hat: np.ndarray
    R_hat: np.ndarray
    R_tilde: np.ndarray
    omega_hat: float
    omega_tilde: float | None


def pilot_observe(h_b, cfg: SystemConfig, stream: np.random.Generator) -> np.ndarray:
    """Despread pilot observation ``y_p = sqrt(tau_p rho_p) h_b + n_p`` with ``n_p ~ CN(0, sigma2 I)``."""
    h_b = np.asarray(h_b, dtype=complex)
    size = None if h_b.ndim == 1 else h_b.shape[0]
    noise = sample_standard_complex_gaussian(h_b.shape[-1], stream, size)
    return math.sqrt(cfg.pilot_snr) * h_b + math.sqrt(cfg.sigma2) * noise


def mmse_filter(R_hb, cfg: SystemConfig) -> MmseFilter:
    """Filter ``A = sqrt(tp) R (tp R + sigma2 I)^-1`` with ``tp = tau_p rho_p``.

    The system matrix is factored by Cholesky; ``R`` and ``tp R + sigma2 I``
    commute, so ``A = sqrt(tp) S^-1 R`` as well.
    """
    if cfg.sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    R = check_hermitian(R_hb, "R_hb")
    R = 0.5 * (R + R.conj().T)
    tp = cfg.pilot_snr
    S = tp * R + cfg.sigma2 * np.eye(R.shape[0])
    S_inv_R = linalg.cho_solve(linalg.cho_factor(S, lower=True), R)
    A = math.sqrt(tp) * S_inv_R
    R_hat = tp * (R @ S_inv_R)
    R_hat = 0.5 * (R_hat + R_hat.conj().T)
    return MmseFilter(A, R_hat, R - R_hat)


def _scaled_identity(R: np.ndarray) -> float | None:
    d = np.real(np.diag(R))
    off = R - np.diag(np.diag(R))
    scale = max(float(np.max(np.abs(d))), np.finfo(float).tiny)
    if np.max(np.abs(off)) > 1e-12 * scale or np.ptp(d) > 1e-12 * scale:
        return None
    return float(d.mean())


def mmse_estimate(y_p, R_hb, cfg: SystemConfig) -> EstimationResult:
    """Apply the MMSE filter to one observation (or a batch along axis 0)."""
    filt = mmse_filter(R_hb, cfg)
    y = np.asarray(y_p, dtype=complex)
    h_hat = y @ filt.A.T
    M = filt.R_hat.shape[0]
    beta = _scaled_identity(np.asarray(R_hb, dtype=complex))
    if beta is not None:
        omega_hat, omega_tilde = isotropic_variances(beta, cfg)
    else:
        omega_hat, omega_tilde = float(np.real(np.trace(filt.R_hat))) / M, None
    return EstimationResult(h_hat, filt.R_hat, filt.R_tilde, omega_hat, omega_tilde)


def isotropic_variances(beta_b, cfg: SystemConfig):
    """Per-entry estimate and error variances ``(omega_hat, omega_tilde)`` for ``R_b = I``.

    Accepts scalar or array ``beta_b``.

    Examples
    --------
    >>> isotropic_variances(5.0, SystemConfig())
    (4.995004995004995, 0.004995004995004995)
    """
    b = np.asarray(beta_b, dtype=float)
    tp = cfg.pilot_snr
    denom = tp * b + cfg.sigma2
    omega_hat = tp * b**2 / denom
    omega_tilde = b * cfg.sigma2 / denom
    if b.ndim == 0:
        return float(omega_hat), float(omega_tilde)
    return omega_hat, omega_tilde


def prelog_and_threshold(cfg: SystemConfig):
    """Pre-log ``eta = 1 - tau_p / Tc`` and SINR-ratio threshold ``theta = 2**(R_th / eta)``."""
    if not cfg.tau_p < cfg.Tc:
        raise ValueError("tau_p must be < Tc")
    eta = 1.0 - cfg.tau_p / cfg.Tc
    return eta, 2.0 ** (cfg.R_th / eta)
