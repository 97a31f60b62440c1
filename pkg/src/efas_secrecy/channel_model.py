"""Scenario configuration and two-timescale channel generation.

The legitimate and eavesdropper channels are

    h_b = sqrt(beta_b) R_b^{1/2} g_b,    h_e = sqrt(beta_e) R_e^{1/2} g_e,
    g_e = rho C g_b + sqrt(1 - rho^2) u,

where ``beta_b`` is the slowly varying routing gain and ``u`` is independent
of ``g_b``.  All draws accept a leading batch dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigValidationError
from .statmath import PSD_RTOL, check_hermitian, psd_sqrt, sample_standard_complex_gaussian

__all__ = [
    "BETA_E_MODES",
    "VARIANCE_MODES",
    "ChannelPair",
    "RoutingGainDistribution",
    "SystemConfig",
    "assemble_channels",
    "db_to_linear",
    "draw_small_scale",
    "linear_to_db",
    "sample_routing_gain",
    "validate_config",
    "worst_case_beta_e",
]

VARIANCE_MODES = ("exact-conditional", "paper-approx")
BETA_E_MODES = ("worst-case", "fixed")
MATRIX_FIELDS = ("C", "R_b", "R_e")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Routing gain


_ROUTING_PARAMS = {
    "point-mass": ("value",),
    "uniform": ("low", "high"),
    "gamma": ("shape", "scale"),
    "lognormal": ("mu", "sigma"),
}


@dataclass(frozen=True)
class RoutingGainDistribution:
    """Law of the routing gain ``beta_b`` over the routing timescale.

    Parameters
    ----------
    kind : {'point-mass', 'uniform', 'gamma', 'lognormal'}
    params : dict
        ``value`` for point-mass; ``low``, ``high`` for uniform; ``shape``,
        ``scale`` for gamma; ``mu``, ``sigma`` (of the underlying normal) for
        lognormal.
    note : str
        Free-text description of the routing timescale; not used numerically.
    """

    kind: str = "point-mass"
    params: dict = field(default_factory=lambda: {"value": 5.0})
    note: str = ""

    @classmethod
    def point_mass(cls, value: float) -> "RoutingGainDistribution":
        return cls("point-mass", {"value": float(value)})

    def validate(self) -> list[tuple[str, str]]:
        errs = []
        if self.kind not in _ROUTING_PARAMS:
            return [("beta_b.kind", f"unknown kind {self.kind!r}")]
        expected = set(_ROUTING_PARAMS[self.kind])
        if set(self.params) != expected:
            return [("beta_b", f"{self.kind} needs parameters {sorted(expected)}, got {sorted(self.params)}")]
        p = {k: float(v) for k, v in self.params.items()}
        if not all(math.isfinite(v) for v in p.values()):
            return [("beta_b", "parameters must be finite")]
        if self.kind == "point-mass" and p["value"] <= 0:
            errs.append(("beta_b.value", "must be > 0"))
        elif self.kind == "uniform" and not 0 < p["low"] < p["high"]:
            errs.append(("beta_b.low", "need 0 < low < high"))
        elif self.kind == "gamma" and (p["shape"] <= 0 or p["scale"] <= 0):
            errs.append(("beta_b.shape", "shape and scale must be > 0"))
        elif self.kind == "lognormal" and p["sigma"] < 0:
            errs.append(("beta_b.sigma", "must be >= 0"))
        return errs

    @property
    def is_point_mass(self) -> bool:
        return self.kind == "point-mass"

    @property
    def mean(self) -> float:
        p = self.params
        if self.kind == "point-mass":
            return float(p["value"])
        if self.kind == "uniform":
            return 0.5 * (p["low"] + p["high"])
        if self.kind == "gamma":
            return p["shape"] * p["scale"]
        return math.exp(p["mu"] + 0.5 * p["sigma"] ** 2)

    def sample(self, stream: np.random.Generator, size=None):
        p = self.params
        if self.kind == "point-mass":
            v = float(p["value"])
            return v if size is None else np.full(int(size), v)
        if self.kind == "uniform":
            return stream.uniform(p["low"], p["high"], size)
        if self.kind == "gamma":
            return stream.gamma(p["shape"], p["scale"], size)
        return stream.lognormal(p["mu"], p["sigma"], size)


def sample_routing_gain(dist: RoutingGainDistribution, stream: np.random.Generator) -> float:
    """One draw of ``beta_b``; a point mass returns its constant without consuming randomness."""
    return float(dist.sample(stream))


# ---------------------------------------------------------------------------
# System configuration


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Every scenario parameter, with defaults from the reference numerical setup.

    Powers and variances are linear.  ``C``, ``R_b`` and ``R_e`` are ``None``
    for the identity; the ``*_matrix`` properties always return arrays.
    ``beta_e_mode`` selects whether metrics use the worst case of
    ``beta_e_set`` or the fixed ``beta_e``.
    """

    M: int = 16
    Tc: int = 200
    tau_p: int = 20
    rho_p: float = 10.0
    sigma2: float = 1.0
    P: float = 100.0
    alpha: float = 0.9
    R_th: float = 1.0
    rho: float = 0.6
    C: np.ndarray | None = None
    R_b: np.ndarray | None = None
    R_e: np.ndarray | None = None
    beta_b_dist: RoutingGainDistribution = field(default_factory=RoutingGainDistribution)
    beta_e_set: tuple = (1.0, 3.0)
    beta_e: float = 3.0
    beta_e_mode: str = "worst-case"
    seed: int = 2026
    variance_mode: str = "exact-conditional"

    # derived quantities -------------------------------------------------
    @property
    def P_s(self) -> float:
        return self.alpha * self.P

    @property
    def P_a(self) -> float:
        return (1.0 - self.alpha) * self.P

    @property
    def theta_a(self) -> float:
        return 1.0 - self.alpha

    @property
    def pilot_snr(self) -> float:
        """``tau_p * rho_p``, the total pilot energy."""
        return self.tau_p * self.rho_p

    @property
    def C_matrix(self) -> np.ndarray:
        return np.eye(self.M, dtype=complex) if self.C is None else np.asarray(self.C, dtype=complex)

    @property
    def R_b_matrix(self) -> np.ndarray:
        return np.eye(self.M, dtype=complex) if self.R_b is None else np.asarray(self.R_b, dtype=complex)

    @property
    def R_e_matrix(self) -> np.ndarray:
        return np.eye(self.M, dtype=complex) if self.R_e is None else np.asarray(self.R_e, dtype=complex)

    @property
    def is_isotropic(self) -> bool:
        """True when ``R_b = R_e = C = I`` so every metric depends on the estimate only through its norm."""
        return self.C is None and self.R_b is None and self.R_e is None

    @property
    def effective_beta_e(self) -> float:
        return worst_case_beta_e(self.beta_e_set) if self.beta_e_mode == "worst-case" else float(self.beta_e)

    def with_(self, **changes) -> "SystemConfig":
        """Copy with fields replaced; ``beta_b`` accepts a bare float as a point mass."""
        if "beta_b" in changes:
            changes["beta_b_dist"] = RoutingGainDistribution.point_mass(changes.pop("beta_b"))
        if "P_dB" in changes:
            changes["P"] = float(db_to_linear(changes.pop("P_dB")))
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, SystemConfig):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name in MATRIX_FIELDS:
                if (a is None) != (b is None):
                    return False
                if a is not None and not np.array_equal(np.asarray(a), np.asarray(b)):
                    return False
            elif f.name == "beta_e_set":
                if tuple(map(float, a)) != tuple(map(float, b)):
                    return False
            elif a != b:
                return False
        return True

    __hash__ = None


def _is_identity(m: np.ndarray) -> bool:
    return bool(np.array_equal(m, np.eye(m.shape[0])))


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every invariant and return a normalized copy.

    Normalization converts matrices to complex arrays and replaces exact
    identities by ``None``.  All violations are collected and raised
    together as :class:`ConfigValidationError`.
    """
    errs: list[tuple[str, str]] = []

    def need(cond, name, msg):
        if not cond:
            errs.append((name, msg))

    def finite(name):
        v = getattr(cfg, name)
        ok = isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) and math.isfinite(v)
        need(ok, name, "must be a finite number")
        return ok

    for name in ("M", "Tc", "tau_p", "seed"):
        v = getattr(cfg, name)
        need(isinstance(v, (int, np.integer)) and not isinstance(v, bool), name, "must be an integer")
    numeric_ok = all(finite(n) for n in ("rho_p", "sigma2", "P", "alpha", "R_th", "rho", "beta_e"))
    if errs:
        raise ConfigValidationError(errs)

    need(cfg.M >= 2, "M", "need at least 2 antennas")
    need(cfg.M <= 256, "M", "at most 256 antennas supported")
    need(cfg.Tc >= 1, "Tc", "must be >= 1")
    need(0 <= cfg.tau_p < cfg.Tc, "tau_p", "need 0 <= tau_p < Tc")
    need(0 <= cfg.seed < 2**64, "seed", "must fit in 64 bits unsigned")
    if numeric_ok:
        need(cfg.rho_p > 0, "rho_p", "must be > 0")
        need(cfg.sigma2 > 0, "sigma2", "must be > 0")
        need(cfg.P > 0, "P", "must be > 0")
        need(0 <= cfg.alpha <= 1, "alpha", "must lie in [0, 1]")
        need(cfg.R_th >= 0, "R_th", "must be >= 0")
        need(0 <= cfg.rho < 1, "rho", "must lie in [0, 1)")
        need(cfg.beta_e > 0, "beta_e", "must be > 0")
    need(cfg.variance_mode in VARIANCE_MODES, "variance_mode", f"must be one of {VARIANCE_MODES}")
    need(cfg.beta_e_mode in BETA_E_MODES, "beta_e_mode", f"must be one of {BETA_E_MODES}")
    try:
        lo, hi = (float(v) for v in cfg.beta_e_set)
        need(0 < lo <= hi and math.isfinite(hi), "beta_e_set", "need 0 < min <= max")
        beta_e_set = (lo, hi)
    except (TypeError, ValueError):
        errs.append(("beta_e_set", "must be a pair [min, max]"))
        beta_e_set = cfg.beta_e_set
    if isinstance(cfg.beta_b_dist, RoutingGainDistribution):
        errs.extend(cfg.beta_b_dist.validate())
    else:
        errs.append(("beta_b_dist", "must be a RoutingGainDistribution"))

    mats = {}
    for name in MATRIX_FIELDS:
        raw = getattr(cfg, name)
        if raw is None:
            mats[name] = None
            continue
        m = np.asarray(raw, dtype=complex)
        if m.shape != (cfg.M, cfg.M):
            errs.append((name, f"must be {cfg.M}x{cfg.M}, got shape {m.shape}"))
            continue
        if not np.all(np.isfinite(m)):
            errs.append((name, "non-finite entries"))
            continue
        if name == "C":
            norm = float(np.linalg.norm(m, 2))
            need(norm <= 1 + 1e-10, name, f"spectral norm {norm:.6g} exceeds 1")
        else:
            try:
                check_hermitian(m, name)
                vals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
                need(vals[0] >= -PSD_RTOL * max(vals[-1], 1e-300), name, "must be positive semidefinite")
                need(vals[-1] > 0, name, "must be nonzero")
            except ValueError as exc:
                errs.append((name, str(exc)))
        mats[name] = None if _is_identity(m) else m
    if errs:
        raise ConfigValidationError(errs)
    floats = {n: float(getattr(cfg, n)) for n in ("rho_p", "sigma2", "P", "alpha", "R_th", "rho", "beta_e")}
    ints = {n: int(getattr(cfg, n)) for n in ("M", "Tc", "tau_p", "seed")}
    return replace(cfg, beta_e_set=beta_e_set, **ints, **floats, **mats)


def worst_case_beta_e(beta_e_set) -> float:
    """Upper endpoint of the eavesdropper's large-scale uncertainty interval."""
    try:
        lo, hi = (float(v) for v in beta_e_set)
    except (TypeError, ValueError) as exc:
        raise ValueError("beta_e_set must be a pair [min, max]") from exc
    if not (0 < lo <= hi):
        raise ValueError(f"empty or nonpositive interval [{lo}, {hi}]")
    return hi


# ---------------------------------------------------------------------------
# Channel draws


@dataclass(frozen=True, eq=False)
class ChannelPair:
    """One (or a batch of) channel realizations; batch draws stack along axis 0."""

    h_b: np.ndarray
    h_e: np.ndarray
    g_b: np.ndarray
    beta_b: float | np.ndarray
    beta_e: float | np.ndarray


def draw_small_scale(cfg: SystemConfig, stream: np.random.Generator, size=None):
    """Draw ``(g_b, g_e)`` with ``E[g_e g_b^H] = rho C``.

    ``g_b`` is drawn first, then the innovation ``u``.
    """
    g_b = sample_standard_complex_gaussian(cfg.M, stream, size)
    u = sample_standard_complex_gaussian(cfg.M, stream, size)
    if cfg.rho == 0:
        return g_b, u
    coupled = g_b if cfg.C is None else g_b @ cfg.C_matrix.T
    return g_b, cfg.rho * coupled + math.sqrt(1.0 - cfg.rho**2) * u


def _apply_sqrt(g: np.ndarray, root: np.ndarray | None) -> np.ndarray:
    return g if root is None else g @ root.T


def assemble_channels(g_b, g_e, beta_b, beta_e, cfg: SystemConfig) -> ChannelPair:
    """Scale small-scale vectors by routing gains and correlation square roots."""
    bb = np.asarray(beta_b, dtype=float)
    be = np.asarray(beta_e, dtype=float)
    if np.any(bb <= 0) or np.any(be <= 0):
        raise ValueError("beta_b and beta_e must be > 0")
    rb = None if cfg.R_b is None else psd_sqrt(cfg.R_b, "R_b")
    re = None if cfg.R_e is None else psd_sqrt(cfg.R_e, "R_e")
    g_b = np.asarray(g_b, dtype=complex)
    g_e = np.asarray(g_e, dtype=complex)
    sb = np.sqrt(bb)[..., None] if bb.ndim else math.sqrt(float(bb))
    se = np.sqrt(be)[..., None] if be.ndim else math.sqrt(float(be))
    h_b = sb * _apply_sqrt(g_b, rb)
    h_e = se * _apply_sqrt(g_e, re)
    return ChannelPair(h_b, h_e, g_b, beta_b if bb.ndim else float(bb), beta_e if be.ndim else float(be))
