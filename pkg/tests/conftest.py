import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from efas_secrecy.beamforming import ConditionalEveStats
from efas_secrecy.channel_model import SystemConfig
from efas_secrecy.secrecy_analytic import eve_sinr_law
from efas_secrecy.statmath import EigenSpectrum

settings.register_profile(
    "efas",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("efas")


@pytest.fixture
def default_cfg():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def m2_law():
    """Single AN dimension, no leakage mean, unit powers and variances."""
    stats = ConditionalEveStats(0.0, 1.0, EigenSpectrum([1.0], [1]), 0.0)
    return eve_sinr_law(stats, 1.0, 1.0, 1.0)
