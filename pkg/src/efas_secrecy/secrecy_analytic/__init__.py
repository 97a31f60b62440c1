"""Conditional eavesdropper-SINR law, SOP, ESR, high-SNR limits and power split."""

from .asymptotics import (
    AlphaOptimum,
    HighSnrLimits,
    alpha_proxy,
    eve_moment_ratio,
    high_snr_limits,
    mean_ceiling,
    optimize_alpha,
)
from .eve_law import CDF_VARIANTS, PDF_VARIANTS, EveSinrLaw, eve_cdf, eve_pdf, eve_sinr_law
from .metrics import (
    SecrecyReport,
    conditional_secrecy_G,
    conditional_sop,
    esr,
    induced_threshold,
    sop,
)

__all__ = [
    "AlphaOptimum",
    "CDF_VARIANTS",
    "EveSinrLaw",
    "HighSnrLimits",
    "PDF_VARIANTS",
    "SecrecyReport",
    "alpha_proxy",
    "conditional_secrecy_G",
    "conditional_sop",
    "esr",
    "eve_cdf",
    "eve_moment_ratio",
    "eve_pdf",
    "eve_sinr_law",
    "high_snr_limits",
    "induced_threshold",
    "mean_ceiling",
    "optimize_alpha",
    "sop",
]
