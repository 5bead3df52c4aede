"""Closed-form missed-detection probability of the blanked-RE energy detector.

Two cases:

* a known received jamming vector, where the statistic is a scaled
  noncentral chi-square;
* a zero-mean Gaussian jammer spread over ``L`` resources, where the
  statistic conditioned on the overlap ``E`` (jammed REs among the blanked
  ones) is a two-rate sum of exponentials and ``E`` is hypergeometric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats_core
from .airlink import Granularity, SlotConfig
from .detector import calibrate
from .errors import ParameterError


@dataclass(frozen=True)
class OverlapLaw:
    """Distribution of the overlap ``E`` counted in resource elements.

    ``total``, ``blanked`` and ``jammed`` are the population, draws and
    successes of the underlying hypergeometric law, in its own units
    (PRBs, or REs over the whole grid). One unit equals ``unit`` REs.
    """

    total: int
    blanked: int
    jammed: int
    unit: int
    support: np.ndarray
    pmf: np.ndarray

    @property
    def e_min(self) -> int:
        return int(self.support[0])

    @property
    def e_max(self) -> int:
        return int(self.support[-1])

    def mean(self) -> float:
        return float(np.dot(self.support, self.pmf))


@dataclass(frozen=True)
class GaussianJamSpec:
    jam_total: float
    jam_count: int

    def __post_init__(self):
        if self.jam_total < 0 or self.jam_count < 1:
            raise ParameterError("need jam_total >= 0 and jam_count >= 1")

    @property
    def per_re_var(self) -> float:
        return self.jam_total / self.jam_count


def overlap_bounds(total: int, blanked: int, jammed: int, symbols: int = 1) -> tuple[int, int]:
    """Minimum and maximum number of overlapping REs for per-symbol counts."""
    if blanked > total or jammed > total:
        raise ParameterError("blanked and jammed cannot exceed total")
    e_max = min(blanked * symbols, jammed * symbols)
    e_min = 0 if blanked + jammed < total else (blanked + jammed - total) * symbols
    return e_min, e_max


def _law_units(slot: SlotConfig, blank_count: int, jam_count: int) -> tuple[int, int, int, int]:
    if slot.granularity is Granularity.PRB:
        return slot.prb_count, blank_count, jam_count, slot.prb_size * slot.symbols
    n = slot.symbols
    return slot.subcarriers * n, blank_count * n, jam_count * n, 1


def overlap_pmf(slot: SlotConfig, blank_count: int, jam_count: int, exact: bool = False) -> OverlapLaw:
    """Hypergeometric law of the overlap.

    PRB granularity: ``blank_count`` of ``P`` PRBs blanked and ``jam_count``
    jammed for the whole slot; each overlapping PRB adds ``S_P * N`` REs.
    RE granularity: ``blank_count * N`` blanked REs drawn over the whole
    ``S * N`` grid, the textbook grid-wide law. Patterns that are redrawn
    per symbol follow :func:`overlap_pmf_per_symbol` instead.

    With ``exact=True`` the pmf holds :class:`fractions.Fraction` values.
    """
    total, blanked, jammed, unit = _law_units(slot, blank_count, jam_count)
    lo, hi = stats_core.hypergeom_support(total, jammed, blanked)
    e_lo, e_hi = overlap_bounds(slot.resources, blank_count, jam_count,
                                1 if slot.granularity is Granularity.PRB else slot.symbols)
    lo, hi = max(lo, e_lo), min(hi, e_hi)
    units = np.arange(lo, hi + 1)
    if exact:
        pmf = np.array([stats_core.hypergeom_pmf_exact(total, jammed, blanked, int(o)) for o in units],
                       dtype=object)
    else:
        pmf = np.atleast_1d(stats_core.hypergeom_pmf(total, jammed, blanked, units))
    return OverlapLaw(total, blanked, jammed, unit, units * unit, pmf)


def overlap_pmf_per_symbol(slot: SlotConfig, blank_count: int, jam_count: int) -> OverlapLaw:
    """Overlap law when both RE patterns are redrawn independently on every symbol.

    The overlap is the sum of ``N`` independent per-symbol hypergeometric
    counts, so its pmf is their ``N``-fold convolution.
    """
    if slot.granularity is not Granularity.RE:
        raise ParameterError("per-symbol patterns only exist at RE granularity")
    s = slot.subcarriers
    lo, hi = stats_core.hypergeom_support(s, jam_count, blank_count)
    one = np.atleast_1d(stats_core.hypergeom_pmf(s, jam_count, blank_count, np.arange(0, hi + 1)))
    pmf = np.array([1.0])
    for _ in range(slot.symbols):
        pmf = np.convolve(pmf, one)
    e_lo = lo * slot.symbols
    support = np.arange(e_lo, pmf.size)
    return OverlapLaw(s * slot.symbols, blank_count * slot.symbols, jam_count * slot.symbols, 1,
                      support, pmf[e_lo:])


def pmd_known_jam(threshold: float, jam_energy: float, sample_count: int, noise_power: float = 1.0) -> float:
    """MD probability when the received jamming vector is deterministic with energy ``jam_energy``.

    ``2 ||r||^2 / noise`` is noncentral chi-square with ``2MN`` degrees of
    freedom and noncentrality ``2 ||j||^2 / noise``.
    """
    if not threshold > 0:
        raise ParameterError("threshold must be positive")
    params = stats_core.NoncentralChi2Params(2 * sample_count, 2.0 * jam_energy / noise_power)
    return stats_core.noncentral_chi2_cdf(2.0 * sample_count * threshold / noise_power, params)


def conditional_md_cdf(threshold: float, overlap: int, sample_count: int,
                       noise_power: float, jam_var: float) -> float:
    """``P[statistic < threshold | E = overlap]`` for a Gaussian jammer of per-RE variance ``jam_var``."""
    if not 0 <= overlap <= sample_count:
        raise ParameterError(f"overlap must lie in [0, {sample_count}], got {overlap}")
    mix = stats_core.TwoRateErlangMix(
        count_hot=int(overlap),
        count_cold=int(sample_count - overlap),
        scale_hot=(noise_power + jam_var) / sample_count,
        scale_cold=noise_power / sample_count,
    )
    return stats_core.two_rate_mix_cdf(threshold, mix)


def pmd_gaussian_jammer(slot: SlotConfig, blank_count: int, jam_count: int, target_pfa: float,
                        jam_total: float, jam_channel_energy: float = 1.0,
                        threshold: float | None = None, law: OverlapLaw | None = None) -> float:
    """MD probability against a Gaussian jammer, by total probability over the overlap.

    Counts are in resources of ``slot.granularity``. The per-RE jamming
    variance at the receiver is ``jam_total / L * jam_channel_energy`` with
    ``L`` the jammed subcarriers per symbol.
    """
    mn = blank_count * slot.resource_width * slot.symbols
    if mn == 0:
        raise ParameterError("detection needs at least one blanked resource")
    if threshold is None:
        threshold = calibrate(target_pfa, mn, slot.noise_power).threshold
    if jam_count == 0 or jam_total == 0:
        return conditional_md_cdf(threshold, 0, mn, slot.noise_power, 0.0)
    jam_var = jam_total / (jam_count * slot.resource_width) * jam_channel_energy
    if law is None:
        law = overlap_pmf(slot, blank_count, jam_count)
    total = 0.0
    for e, w in zip(law.support, law.pmf):
        if w == 0:
            continue
        total += float(w) * conditional_md_cdf(threshold, int(e), mn, slot.noise_power, jam_var)
    return float(min(max(total, 0.0), 1.0))

