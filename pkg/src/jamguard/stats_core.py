"""Probability kernels for the energy detector.

Gamma law of the noise-only statistic, the Poisson-mixture noncentral
chi-square, the Gaussian tail, hypergeometric overlap counts and the
two-rate sum of exponentials that governs the statistic under a Gaussian
jammer partially overlapping the blanked resources.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError, ParameterError

# Largest total count for which the alternating closed form is attempted.
EXACT_COUNT_LIMIT = 60
# Relative gap under which the two scales are merged into one Erlang law.
RATE_MERGE_RTOL = 1e-12
# Accepted cancellation loss (absolute) in the alternating closed form.
_CLOSED_FORM_ERR = 1e-12
_POISSON_TAIL = 1e-12
_SERIES_TOL = 1e-16
_SERIES_BLOCK = 100_000


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ParameterError(f"gamma shape and scale must be positive, got {self.shape}, {self.scale}")


@dataclass(frozen=True)
class NoncentralChi2Params:
    dof: int
    noncentrality: float

    def __post_init__(self):
        if self.dof < 1:
            raise ParameterError(f"dof must be >= 1, got {self.dof}")
        if not self.noncentrality >= 0:
            raise ParameterError(f"noncentrality must be >= 0, got {self.noncentrality}")


@dataclass(frozen=True)
class TwoRateErlangMix:
    """Sum of ``count_hot`` Exp(scale_hot) and ``count_cold`` Exp(scale_cold) variates."""

    count_hot: int
    count_cold: int
    scale_hot: float
    scale_cold: float

    def __post_init__(self):
        if self.count_hot < 0 or self.count_cold < 0:
            raise ParameterError("counts must be nonnegative")
        if self.count_hot + self.count_cold < 1:
            raise ParameterError("at least one exponential term is required")
        if not self.scale_cold > 0:
            raise ParameterError(f"scale_cold must be positive, got {self.scale_cold}")
        if self.scale_hot < self.scale_cold * (1 - RATE_MERGE_RTOL):
            raise ParameterError("scale_hot must not be smaller than scale_cold")

    @property
    def mean(self) -> float:
        return self.count_hot * self.scale_hot + self.count_cold * self.scale_cold

    @property
    def variance(self) -> float:
        return self.count_hot * self.scale_hot**2 + self.count_cold * self.scale_cold**2


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def gamma_cdf(x, params: GammaParams):
    """Regularized lower incomplete gamma ``P(k, x / theta)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("gamma_cdf requires x >= 0")
    return _scalar_or_array(special.gammainc(params.shape, x / params.scale))


def gamma_sf(x, params: GammaParams):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("gamma_sf requires x >= 0")
    return _scalar_or_array(special.gammaincc(params.shape, x / params.scale))


def _check_open_probability(p: float, name: str = "p"):
    if not (0.0 < p < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {p}")


def _gamma_pdf_std(k: float, y: float) -> float:
    if y <= 0:
        return 0.0
    return math.exp((k - 1) * math.log(y) - y - math.lgamma(k))


def gamma_inv_cdf(p: float, params: GammaParams) -> float:
    """Quantile of the gamma law, polished by Newton steps on the CDF."""
    _check_open_probability(p)
    k = params.shape
    if p > 0.5:
        y = special.gammainccinv(k, 1.0 - p)
    else:
        y = special.gammaincinv(k, p)
    for _ in range(3):
        dens = _gamma_pdf_std(k, y)
        if dens <= 0:
            break
        if p > 0.5:
            err = (1.0 - p) - special.gammaincc(k, y)
            step = -err / dens
        else:
            step = -(special.gammainc(k, y) - p) / dens
        y_new = y + step
        if y_new <= 0:
            break
        y = y_new
        if abs(step) <= 1e-15 * y:
            break
    return float(y * params.scale)


def gamma_isf(q: float, params: GammaParams) -> float:
    """Inverse survival function: ``x`` with ``P[X > x] = q``.

    Works directly on the upper tail, so tiny ``q`` keep full relative precision.
    """
    _check_open_probability(q, "q")
    k = params.shape
    y = special.gammainccinv(k, q)
    for _ in range(3):
        dens = _gamma_pdf_std(k, y)
        if dens <= 0:
            break
        step = (special.gammaincc(k, y) - q) / dens
        if y + step <= 0:
            break
        y += step
        if abs(step) <= 1e-15 * y:
            break
    return float(y * params.scale)


def _poisson_window(lam: float) -> tuple[int, int]:
    mode = int(math.floor(lam))
    width = int(math.ceil(8.0 * math.sqrt(lam) + 30))
    while True:
        lo = max(0, mode - width)
        hi = mode + width
        omitted = (special.pdtr(lo - 1, lam) if lo > 0 else 0.0) + special.pdtrc(hi, lam)
        if omitted < _POISSON_TAIL:
            return lo, hi
        width *= 2


def noncentral_chi2_cdf(x: float, params: NoncentralChi2Params) -> float:
    """CDF as a Poisson(delta/2) mixture of central chi-square CDFs.

    The Poisson window is widened until the neglected weight is below 1e-12,
    which bounds the truncation error of the mixture.
    """
    if x < 0:
        raise DomainError("noncentral_chi2_cdf requires x >= 0")
    half_dof = params.dof / 2.0
    lam = params.noncentrality / 2.0
    if lam == 0.0:
        return float(special.gammainc(half_dof, x / 2.0))
    lo, hi = _poisson_window(lam)
    k = np.arange(lo, hi + 1, dtype=float)
    log_w = -lam + k * math.log(lam) - special.gammaln(k + 1.0)
    total = np.sum(np.exp(log_w) * special.gammainc(half_dof + k, x / 2.0))
    return float(min(max(total, 0.0), 1.0))


def gaussian_q(x):
    """Upper tail of the standard normal law."""
    return _scalar_or_array(special.ndtr(-np.asarray(x, dtype=float)))


def gaussian_q_inv(p: float) -> float:
    _check_open_probability(p)
    return float(-special.ndtri(p))


def _check_hypergeom(population: int, successes: int, draws: int):
    if population < 1 or successes < 0 or draws < 0:
        raise ParameterError("hypergeometric counts must be nonnegative with population >= 1")
    if successes > population or draws > population:
        raise ParameterError(
            f"successes ({successes}) and draws ({draws}) cannot exceed population ({population})"
        )


def hypergeom_support(population: int, successes: int, draws: int) -> tuple[int, int]:
    _check_hypergeom(population, successes, draws)
    return max(0, draws + successes - population), min(successes, draws)


def _log_comb(n, k):
    return special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)


def hypergeom_pmf(population: int, successes: int, draws: int, observed):
    """Probability of ``observed`` successes among ``draws`` taken without replacement.

    Evaluated in log-gamma arithmetic; zero outside the support.
    """
    lo, hi = hypergeom_support(population, successes, draws)
    obs = np.asarray(observed)
    inside = (obs >= lo) & (obs <= hi)
    o = np.where(inside, obs, lo).astype(float)
    log_p = (
        _log_comb(successes, o)
        + _log_comb(population - successes, draws - o)
        - _log_comb(population, draws)
    )
    return _scalar_or_array(np.where(inside, np.exp(log_p), 0.0))


def hypergeom_pmf_exact(population: int, successes: int, draws: int, observed: int) -> Fraction:
    lo, hi = hypergeom_support(population, successes, draws)
    if not lo <= observed <= hi:
        return Fraction(0)
    return Fraction(
        math.comb(successes, observed) * math.comb(population - successes, draws - observed),
        math.comb(population, draws),
    )


def _two_rate_closed_form(x: float, a1: int, a2: int, b1: float, b2: float) -> tuple[float, float]:
    """Alternating partial-fraction form; returns (cdf, magnitude of the largest term)."""
    alphas = (a1, a2)
    betas = (b1, b2)
    total = 0.0
    largest = 0.0
    for i in (0, 1):
        b = 1 - i
        ai, ab = alphas[i], alphas[b]
        ratio = betas[b] / betas[i]
        for j in range(1, ai + 1):
            omega = ai - j
            chi = (
                (-ratio) ** omega
                * math.comb(ab + omega - 1, omega)
                / (1.0 - ratio) ** (ab + omega)
            )
            # sum_{k<j} (x/beta)^k/k! e^{-x/beta} is the regularized upper gamma Q(j, x/beta)
            term = chi * special.gammaincc(j, x / betas[i])
            total += term
            largest = max(largest, abs(chi))
    return 1.0 - total, largest


def _two_rate_series(x: float, a1: int, a2: int, b1: float, b2: float) -> float:
    """Exact positive-term expansion of the two-rate sum.

    Exp with the slower rate is a geometric sum of exponentials with the faster
    rate, so the hot part becomes a negative-binomial number of extra cold-scale
    exponentials: CDF = sum_k NB(k; a1, b2/b1) P(a1 + a2 + k, x / b2).
    """
    p = b2 / b1
    y = x / b2
    n0 = a1 + a2
    log_p, log_q = math.log(p), math.log1p(-p)
    # beyond this index P(n0 + k, y) is negligible
    k_gamma = max(0, int(math.ceil(y + 20.0 * math.sqrt(y + 1.0) + 60.0 - n0)))
    total = 0.0
    start = 0
    while start <= k_gamma:
        k = np.arange(start, min(k_gamma, start + _SERIES_BLOCK - 1) + 1, dtype=float)
        log_w = (
            special.gammaln(a1 + k) - special.gammaln(a1) - special.gammaln(k + 1.0)
            + a1 * log_p + k * log_q
        )
        g = special.gammainc(n0 + k, y)
        total += float(np.sum(np.exp(log_w) * g))
        remaining_weight = special.nbdtrc(int(k[-1]), a1, p)
        if remaining_weight * g[-1] < _SERIES_TOL or g[-1] < _SERIES_TOL:
            break
        start = int(k[-1]) + 1
    return min(max(total, 0.0), 1.0)


def _two_rate_moment(x: float, params: TwoRateErlangMix) -> float:
    shape = params.mean**2 / params.variance
    scale = params.variance / params.mean
    return float(special.gammainc(shape, x / scale))


def two_rate_mix_cdf(x: float, params: TwoRateErlangMix, method: str = "auto") -> float:
    """CDF of the sum of two groups of i.i.d. exponentials with different scales.

    ``method``:
      ``auto``        single-rate reductions first, then the alternating closed
                      form for small, well-conditioned counts, else the series;
      ``closed_form`` alternating partial-fraction form only;
      ``series``      positive negative-binomial mixture of Erlang CDFs;
      ``moment``      two-moment gamma fit (approximation, for comparison).
    """
    if x < 0:
        raise DomainError("two_rate_mix_cdf requires x >= 0")
    a1, a2 = int(params.count_hot), int(params.count_cold)
    b1, b2 = float(params.scale_hot), float(params.scale_cold)
    if x == 0:
        return 0.0
    if a1 == 0:
        return float(special.gammainc(a2, x / b2))
    if a2 == 0:
        return float(special.gammainc(a1, x / b1))
    if (b1 - b2) <= RATE_MERGE_RTOL * b2:
        return float(special.gammainc(a1 + a2, x / b2))

    if method == "moment":
        return _two_rate_moment(x, params)
    if method == "series":
        return _two_rate_series(x, a1, a2, b1, b2)
    if method == "closed_form":
        return _two_rate_closed_form(x, a1, a2, b1, b2)[0]
    if method != "auto":
        raise ParameterError(f"unknown method {method!r}")

    if a1 + a2 <= EXACT_COUNT_LIMIT:
        with np.errstate(over="ignore", invalid="ignore"):
            value, largest = _two_rate_closed_form(x, a1, a2, b1, b2)
        if math.isfinite(value) and largest * np.finfo(float).eps < _CLOSED_FORM_ERR:
            return min(max(value, 0.0), 1.0)
    return _two_rate_series(x, a1, a2, b1, b2)
