"""MRT plus null-space artificial noise, both SINRs, and the eavesdropper's
conditional statistics given the channel estimate.

With ``w = h_hat / ||h_hat||`` and ``V`` an orthonormal basis of the
complement of ``w``, the eavesdropper sees

    gamma_e = P_s |X|^2 / (P_a Y + sigma2),   X = h_e^H w,   Y = ||V^H h_e||^2.

Given ``h_hat``, ``h_e`` is complex Gaussian with mean ``mu_e`` and covariance
``R_e|b``; ``X`` then has mean ``w^H mu_e`` and variance ``w^H R_e|b w`` while
``Y`` is governed by the spectrum of ``Q = V^H R_e|b V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import SystemConfig
from .errors import DegenerateEstimateError
from .estimation import isotropic_variances, mmse_filter
from .statmath import EigenSpectrum, hermitian_eigenspectrum, psd_sqrt

__all__ = [
    "ConditionalEveStats",
    "EveConditionalMoments",
    "TxDesign",
    "bob_sinr",
    "eve_conditional_distribution",
    "eve_conditional_moments",
    "eve_sinr_realization",
    "isotropic_eve_stats",
    "mrt_and_null_space",
]


@dataclass(frozen=True, eq=False)
class TxDesign:
    """Unit-norm MRT beamformer ``w`` and the ``M x (M-1)`` AN basis ``V``."""

    w: np.ndarray
    V: np.ndarray


@dataclass(frozen=True, eq=False)
class ConditionalEveStats:
    """Parameters of the eavesdropper SINR law given the channel estimate.

    Attributes
    ----------
    mu_X : complex
        Conditional mean of ``X = h_e^H w`` (written as ``w^H mu_e``; only
        ``|mu_X|`` matters).
    sigma2_X : float
        Conditional variance of ``X``.
    Q_spectrum : EigenSpectrum
        Spectrum of ``Q = V^H R_e|b V``.
    kappa : float
        Noncentrality ``|mu_X|^2 / sigma2_X``.
    y_mean_norm2 : float
        ``||V^H mu_e||^2``; nonzero means ``Y`` is noncentral, which the law
        ignores.  Zero whenever ``mu_e`` is parallel to ``h_hat``.
    xy_coupling : float
        ``||V^H R_e|b w||^2 / (sigma2_X * max eig Q)``; zero when ``X`` and the
        AN-subspace projection are conditionally independent.
    """

    mu_X: complex
    sigma2_X: float
    Q_spectrum: EigenSpectrum
    kappa: float
    y_mean_norm2: float = 0.0
    xy_coupling: float = 0.0

    @property
    def is_exact(self) -> bool:
        """True when the conditional-independence structure holds to rounding."""
        return self.y_mean_norm2 <= 1e-18 * (1.0 + abs(self.mu_X) ** 2) and self.xy_coupling <= 1e-20


@dataclass(frozen=True, eq=False)
class EveConditionalMoments:
    """Conditional Gaussian law of ``g_b`` and ``h_e`` given ``h_hat``.

    ``cross`` is ``Cov(g_b, h_hat)`` and ``R_hat_pinv`` the pseudo-inverse of
    the estimate covariance; together they define the exact conditioning
    update used by the Monte-Carlo oracle.
    """

    mean_g: np.ndarray
    cov_g: np.ndarray
    mean_e: np.ndarray
    cov_e: np.ndarray
    cross: np.ndarray
    R_hat_pinv: np.ndarray


def mrt_and_null_space(h_hat) -> TxDesign:
    """MRT direction and an orthonormal completion of its complement.

    The completion starts from the standard basis with the coordinate where
    ``|w|`` is largest removed, then orthonormalizes by Householder QR.

    Raises
    ------
    DegenerateEstimateError
        If ``h_hat`` is zero.
    """
    h = np.asarray(h_hat, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(h))
    if not norm > 0 or not math.isfinite(norm):
        raise DegenerateEstimateError("channel estimate has zero norm")
    w = h / norm
    M = w.size
    pivot = int(np.argmax(np.abs(w)))
    basis = np.empty((M, M), dtype=complex)
    basis[:, 0] = w
    basis[:, 1:] = np.delete(np.eye(M), pivot, axis=1)
    q, _ = np.linalg.qr(basis)
    V = q[:, 1:]
    # one Gram-Schmidt pass to push V^H w down to rounding level
    V = V - np.outer(w, w.conj() @ V)
    V, _ = np.linalg.qr(V)
    return TxDesign(w, V)


def bob_sinr(h_hat, R_tilde, P_s: float, P_a: float, sigma2: float, design: TxDesign | None = None) -> float:
    """Effective (use-and-forget) SINR at the legitimate receiver.

    Parameters
    ----------
    h_hat : array_like
        Channel estimate.
    R_tilde : float or array_like
        Estimation-error covariance; a scalar means ``R_tilde * I``.
    P_s, P_a : float
        Data and AN powers.
    sigma2 : float
        Receiver noise variance.
    design : TxDesign, optional
        Reuse a precomputed beamformer.

    Notes
    -----
    ``tr(V^H R V) = tr(R) - w^H R w`` since ``V V^H = I - w w^H``; the
    denominator is therefore independent of the chosen AN basis.
    """
    h = np.asarray(h_hat, dtype=complex).reshape(-1)
    if sigma2 <= 0 or P_s < 0 or P_a < 0:
        raise ValueError("need P_s, P_a >= 0 and sigma2 > 0")
    gain = float(np.real(np.vdot(h, h)))
    if np.ndim(R_tilde) == 0:
        om = float(R_tilde)
        return P_s * gain / (om * (P_s + P_a * (h.size - 1)) + sigma2)
    if design is None:
        design = mrt_and_null_space(h)
    R = np.asarray(R_tilde, dtype=complex)
    self_leak = float(np.real(np.vdot(design.w, R @ design.w)))
    an_leak = float(np.real(np.trace(design.V.conj().T @ R @ design.V)))
    return P_s * gain / (P_s * self_leak + P_a * an_leak + sigma2)


def eve_sinr_realization(h_e, design: TxDesign, P_s: float, P_a: float, sigma2: float) -> float:
    """Instantaneous eavesdropper SINR for one channel draw."""
    h_e = np.asarray(h_e, dtype=complex).reshape(-1)
    x2 = abs(np.vdot(h_e, design.w)) ** 2
    y = float(np.sum(np.abs(design.V.conj().T @ h_e) ** 2))
    return P_s * x2 / (P_a * y + sigma2)


def eve_conditional_moments(h_hat, beta_b: float, beta_e: float, cfg: SystemConfig) -> EveConditionalMoments:
    """Joint-Gaussian conditioning of ``g_b`` and ``h_e`` on the estimate.

    ``Cov(g_b, h_hat) = sqrt(tp beta_b) R_b^{1/2} A^H`` with ``A`` the MMSE
    filter; the conditional mean and covariance of ``g_b`` follow from the
    usual Schur complement.  ``variance_mode='paper-approx'`` keeps the mean
    but replaces the covariance by ``beta_e (1 - rho^2) R_e``.
    """
    h = np.asarray(h_hat, dtype=complex).reshape(-1)
    M = cfg.M
    Rb = cfg.R_b_matrix
    filt = mmse_filter(beta_b * Rb, cfg)
    rb_half = np.eye(M) if cfg.R_b is None else psd_sqrt(Rb, "R_b")
    re_half = np.eye(M) if cfg.R_e is None else psd_sqrt(cfg.R_e_matrix, "R_e")
    cross = math.sqrt(cfg.pilot_snr * beta_b) * rb_half @ filt.A.conj().T
    R_hat_pinv = np.linalg.pinv(filt.R_hat, hermitian=True)
    gain = cross @ R_hat_pinv
    mean_g = gain @ h
    cov_g = np.eye(M) - gain @ cross.conj().T
    cov_g = 0.5 * (cov_g + cov_g.conj().T)
    C = cfg.C_matrix
    rho = cfg.rho
    mean_e = rho * math.sqrt(beta_e) * re_half @ (C @ mean_g)
    if cfg.variance_mode == "paper-approx":
        cov_e = beta_e * (1.0 - rho**2) * cfg.R_e_matrix
    else:
        inner = rho**2 * (C @ cov_g @ C.conj().T) + (1.0 - rho**2) * np.eye(M)
        cov_e = beta_e * re_half @ inner @ re_half
    cov_e = 0.5 * (cov_e + cov_e.conj().T)
    return EveConditionalMoments(mean_g, cov_g, mean_e, cov_e, cross, R_hat_pinv)


def eve_conditional_distribution(
    h_hat,
    beta_b: float,
    beta_e: float,
    cfg: SystemConfig,
    design: TxDesign | None = None,
    cluster_rel_tol: float = 1e-8,
) -> ConditionalEveStats:
    """Conditional statistics ``(mu_X, sigma2_X, spec(Q), kappa)`` given ``h_hat``."""
    if design is None:
        design = mrt_and_null_space(h_hat)
    mom = eve_conditional_moments(h_hat, beta_b, beta_e, cfg)
    w, V = design.w, design.V
    R = mom.cov_e
    mu_X = complex(np.vdot(w, mom.mean_e))
    sigma2_X = float(np.real(np.vdot(w, R @ w)))
    if not sigma2_X > 0:
        raise ValueError("eavesdropper conditional variance along w is zero")
    Q = V.conj().T @ R @ V
    spec = hermitian_eigenspectrum(0.5 * (Q + Q.conj().T), cluster_rel_tol)
    spec = EigenSpectrum(np.clip(spec.values, 0.0, None), spec.multiplicities)
    y_mean = float(np.sum(np.abs(V.conj().T @ mom.mean_e) ** 2))
    cross = V.conj().T @ R @ w
    top = max(float(spec.values[0]), np.finfo(float).tiny)
    coupling = float(np.real(np.vdot(cross, cross))) / (sigma2_X * top)
    return ConditionalEveStats(mu_X, sigma2_X, spec, abs(mu_X) ** 2 / sigma2_X, y_mean, coupling)


def isotropic_eve_stats(norm2_h_hat, beta_b, beta_e: float, cfg: SystemConfig):
    """Vectorized statistics for ``R_b = R_e = C = I``.

    Returns
    -------
    kappa : ndarray
        Noncentrality per estimate norm.
    sigma2_X : ndarray or float
        Common variance of ``X`` and every AN-subspace eigenvalue.
    """
    nh2 = np.asarray(norm2_h_hat, dtype=float)
    beta_b = np.asarray(beta_b, dtype=float)
    _, omega_tilde = isotropic_variances(beta_b, cfg)
    rho2 = cfg.rho**2
    if cfg.variance_mode == "paper-approx":
        s2 = beta_e * (1.0 - rho2) * np.ones_like(beta_b)
    else:
        s2 = beta_e * (rho2 * omega_tilde / beta_b + 1.0 - rho2)
    kappa = rho2 * beta_e / beta_b * nh2 / s2
    return kappa, s2
