"""Numerical kernel: complex Gaussian sampling, Hermitian spectra, hypoexponential
laws with repeated eigenvalues, Gauss-Laguerre rules and Poisson truncation.

Everything here is pure except the samplers, which only advance the
``numpy.random.Generator`` they are handed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import SeriesTruncationError

__all__ = [
    "EigenSpectrum",
    "ErlangMixture",
    "PartialFractionExpansion",
    "QuadratureRule",
    "check_hermitian",
    "erlang_mixture",
    "gauss_laguerre",
    "hermitian_eigenspectrum",
    "hypoexp_tail",
    "partial_fraction_coefficients",
    "poisson_truncation_index",
    "psd_sqrt",
    "sample_standard_complex_gaussian",
]

HERMITIAN_RTOL = 1e-10
PSD_RTOL = 1e-10
POISSON_CAP = 10_000


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class EigenSpectrum:
    """Clustered real spectrum of a Hermitian matrix.

    Attributes
    ----------
    values : ndarray
        Cluster means, sorted in descending order.
    multiplicities : ndarray of int
        Number of raw eigenvalues merged into each cluster.
    """

    values: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        mult = np.asarray(self.multiplicities, dtype=int).reshape(-1)
        if values.shape != mult.shape:
            raise ValueError("values and multiplicities must have equal length")
        if np.any(mult < 1):
            raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def dim(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def is_simple(self) -> bool:
        return bool(np.all(self.multiplicities == 1))

    def expanded(self) -> np.ndarray:
        """Raw eigenvalues with multiplicities repeated."""
        return np.repeat(self.values, self.multiplicities)

    def positive_part(self, rel_floor: float = 1e-13) -> "EigenSpectrum":
        """Drop clusters that are zero relative to the largest value."""
        if self.values.size == 0:
            return self
        scale = max(float(np.max(np.abs(self.values))), 0.0)
        keep = self.values > rel_floor * scale
        return EigenSpectrum(self.values[keep], self.multiplicities[keep])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and probability-normalized weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class PartialFractionExpansion:
    """Simple-pole expansion ``prod_i (1 + s l_i)^-1 = sum_i a_i (1 + s l_i)^-1``."""

    poles: np.ndarray
    coefficients: np.ndarray


@dataclass(frozen=True)
class ErlangMixture:
    """Signed Erlang mixture ``sum_k c_k Gamma(shape_k, scale_k)``.

    This is the general form of a positive-weighted sum of unit exponentials
    when some weights repeat.  The simple-pole case has every shape equal to 1
    and the coefficients reduce to the partial-fraction coefficients.
    """

    scales: np.ndarray
    shapes: np.ndarray
    coefficients: np.ndarray

    @property
    def abs_mass(self) -> float:
        """Sum of absolute coefficients; large values signal cancellation."""
        return float(np.sum(np.abs(self.coefficients)))


# ---------------------------------------------------------------------------
# Sampling and matrices


def sample_standard_complex_gaussian(dim: int, stream: np.random.Generator, size=None) -> np.ndarray:
    """Draw circularly symmetric CN(0, I) vectors.

    Parameters
    ----------
    dim : int
        Vector length, at least 1.
    stream : numpy.random.Generator
        Source of randomness. Real parts are drawn before imaginary parts.
    size : int, optional
        Number of independent vectors. ``None`` returns shape ``(dim,)``,
        otherwise ``(size, dim)``.
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    shape = (dim,) if size is None else (int(size), dim)
    re = stream.standard_normal(shape)
    im = stream.standard_normal(shape)
    return (re + 1j * im) * math.sqrt(0.5)


def check_hermitian(m, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``m`` as a complex square array after a Hermitian-symmetry check."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(m))), np.finfo(float).tiny)
    if float(np.max(np.abs(m - m.conj().T))) > rtol * scale:
        raise ValueError(f"{name} is not Hermitian within relative tolerance {rtol:g}")
    return m


def psd_sqrt(m, name: str = "matrix") -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Slightly negative eigenvalues (above ``-1e-10`` times the largest) are
    clipped to zero; anything more negative is rejected.
    """
    m = check_hermitian(m, name)
    herm = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    top = max(float(vals[-1]), 0.0)
    if vals[0] < -PSD_RTOL * max(top, np.finfo(float).tiny):
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {vals[0]:.3g})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def hermitian_eigenspectrum(m, cluster_rel_tol: float = 1e-8) -> EigenSpectrum:
    """Eigenvalues of a Hermitian matrix with near-equal values merged.

    Sorted eigenvalues are grouped by single linkage: neighbours whose gap is
    at most ``cluster_rel_tol`` times the larger magnitude join one cluster.
    Each cluster is represented by its mean.

    Examples
    --------
    >>> s = hermitian_eigenspectrum(np.eye(3))
    >>> s.values, s.multiplicities
    (array([1.]), array([3]))
    """
    m = check_hermitian(m)
    vals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]
    groups: list[list[float]] = [[float(vals[0])]]
    for v in vals[1:]:
        prev = groups[-1][-1]
        if abs(prev - v) <= cluster_rel_tol * max(abs(prev), abs(v)):
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    return EigenSpectrum(
        np.array([np.mean(g) for g in groups]),
        np.array([len(g) for g in groups]),
    )


# ---------------------------------------------------------------------------
# Hypoexponential laws


def partial_fraction_coefficients(lambdas, distinct_rel_tol: float = 1e-8) -> PartialFractionExpansion:
    """Coefficients ``a_i = prod_{j != i} l_i / (l_i - l_j)`` for distinct poles.

    Raises
    ------
    ValueError
        If any pole is nonpositive or two poles coincide within
        ``distinct_rel_tol``; use :func:`erlang_mixture` for repeated poles.
    """
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    if lam.size == 0:
        raise ValueError("need at least one pole")
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("poles must be finite and positive")
    srt = np.sort(lam)
    gaps = np.diff(srt)
    if np.any(gaps <= distinct_rel_tol * srt[1:]):
        raise ValueError("repeated poles; use the multiplicity path (erlang_mixture)")
    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, 1.0)
    ratio = lam[:, None] / diff
    np.fill_diagonal(ratio, 1.0)
    return PartialFractionExpansion(lam.copy(), np.prod(ratio, axis=1))


def erlang_mixture(spectrum: EigenSpectrum) -> ErlangMixture:
    """Expand ``prod_i (1 + s l_i)^(-m_i)`` into ``sum c_ir (1 + s l_i)^(-r)``.

    For cluster ``i`` substitute ``u = 1 + s l_i``; the remaining factors form
    ``psi(u) = prod_{j != i} ((1 - l_j/l_i) + u l_j/l_i)^(-m_j)`` and
    ``c_ir`` is the Taylor coefficient of ``u^(m_i - r)`` in ``psi``.  Those
    coefficients follow from the power series of ``log psi`` by the standard
    exponential recursion, so no symbolic differentiation is needed.
    """
    lam = spectrum.values
    mult = spectrum.multiplicities
    if np.any(lam <= 0):
        raise ValueError("eigenvalues must be positive")
    scales, shapes, coefs = [], [], []
    for i, (li, mi) in enumerate(zip(lam, mult)):
        others = [j for j in range(lam.size) if j != i]
        log_psi0 = 0.0
        sign0 = 1.0
        beta = np.empty(len(others))
        mj = np.empty(len(others))
        for k, j in enumerate(others):
            d = li - lam[j]
            ratio = li / d
            log_psi0 += mult[j] * math.log(abs(ratio))
            if ratio < 0 and mult[j] % 2 == 1:
                sign0 = -sign0
            beta[k] = lam[j] / d
            mj[k] = mult[j]
        psi0 = sign0 * math.exp(log_psi0)
        order = int(mi) - 1
        # log psi - log psi(0) = sum_k ell_k u^k with ell_k = sum_j m_j (-beta_j)^k / k
        ell = np.array([np.sum(mj * (-beta) ** k) / k for k in range(1, order + 1)])
        e = np.zeros(order + 1)
        e[0] = 1.0
        for n in range(1, order + 1):
            e[n] = sum(k * ell[k - 1] * e[n - k] for k in range(1, n + 1)) / n
        for r in range(1, int(mi) + 1):
            scales.append(li)
            shapes.append(r)
            coefs.append(psi0 * e[int(mi) - r])
    return ErlangMixture(np.array(scales), np.array(shapes, dtype=int), np.array(coefs))


def hypoexp_tail(spectrum: EigenSpectrum, y):
    """Survival ``P(Y > y)`` of ``Y = sum_i l_i |u_i|^2`` with ``u_i ~ CN(0, 1)``.

    Parameters
    ----------
    spectrum : EigenSpectrum
        Positive eigenvalues with multiplicities.
    y : float or array_like
        Nonnegative evaluation points.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0) or np.any(np.isnan(y_arr)):
        raise ValueError("y must be nonnegative")
    if np.any(spectrum.values <= 0):
        raise ValueError("eigenvalues must be positive")
    if spectrum.is_simple:
        pf = partial_fraction_coefficients(spectrum.values, distinct_rel_tol=0.0)
        out = np.sum(pf.coefficients * np.exp(-y_arr[..., None] / pf.poles), axis=-1)
    else:
        mix = erlang_mixture(spectrum)
        out = np.sum(
            mix.coefficients * special.gammaincc(mix.shapes, y_arr[..., None] / mix.scales),
            axis=-1,
        )
    out = np.where(y_arr == 0, 1.0, np.clip(out, 0.0, 1.0))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Quadrature and series control


def gauss_laguerre(n: int, a: float = 0.0) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule normalized to a Gamma(a + 1) measure.

    The rule integrates ``x**a * exp(-x) * p(x) / Gamma(a + 1)`` exactly for
    polynomials ``p`` of degree up to ``2n - 1``, so the weights sum to 1.

    Parameters
    ----------
    n : int
        Number of nodes, 1 to 64.
    a : float
        Laguerre parameter, greater than -1.
    """
    n = int(n)
    if not 1 <= n <= 64:
        raise ValueError(f"n must be in [1, 64], got {n}")
    if a <= -1:
        raise ValueError("a must exceed -1")
    x, w = special.roots_genlaguerre(n, float(a))
    return QuadratureRule(np.asarray(x, dtype=float), np.asarray(w, dtype=float) / math.exp(special.gammaln(a + 1.0)))


def poisson_truncation_index(kappa: float, tail_eps: float = 1e-12) -> int:
    """Smallest ``m`` with ``P(K > m) < tail_eps`` for ``K ~ Poisson(kappa)``.

    Terms are generated in log space by the running recursion
    ``log p_m = log p_{m-1} + log(kappa / m)`` and the tail is accumulated
    from the far end so small masses are summed without cancellation.
    """
    kappa = float(kappa)
    if not (kappa >= 0 and math.isfinite(kappa)):
        raise ValueError("kappa must be finite and nonnegative")
    if not 0 < tail_eps < 1:
        raise ValueError("tail_eps must be in (0, 1)")
    if kappa == 0:
        return 0
    hi = int(kappa + 12.0 * math.sqrt(kappa) + 60.0)
    if hi > 4 * POISSON_CAP:
        raise SeriesTruncationError(f"Poisson mean {kappa:g} exceeds the truncation cap")
    m = np.arange(hi + 1)
    log_terms = -kappa + np.concatenate(([0.0], np.cumsum(np.log(kappa / m[1:]))))
    terms = np.exp(log_terms)
    tail = np.cumsum(terms[::-1])[::-1]  # tail[m] = P(K >= m)
    above = np.append(tail[1:], 0.0)  # P(K > m)
    idx = int(np.argmax(above < tail_eps))
    if idx > POISSON_CAP:
        raise SeriesTruncationError(
            f"Poisson truncation index {idx} exceeds cap {POISSON_CAP} (kappa={kappa:g})"
        )
    return idx
