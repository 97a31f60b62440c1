"""Secrecy analysis for E-FAS-assisted MISO wiretap links."""

__version__ = "0.1.0"

from .channel_model import RoutingGainDistribution, SystemConfig, validate_config  # noqa: E402
from .errors import ConfigValidationError, DegenerateEstimateError, SeriesTruncationError  # noqa: E402
from .secrecy_analytic import esr, eve_cdf, eve_pdf, high_snr_limits, optimize_alpha, sop  # noqa: E402

__all__ = [
    "ConfigValidationError",
    "DegenerateEstimateError",
    "RoutingGainDistribution",
    "SeriesTruncationError",
    "SystemConfig",
    "__version__",
    "esr",
    "eve_cdf",
    "eve_pdf",
    "high_snr_limits",
    "optimize_alpha",
    "sop",
    "validate_config",
]
