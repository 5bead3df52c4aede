"""Energy detector on the blanked resource elements.

The GLRT for an unknown received jamming vector reduces to comparing the mean
energy of the blanked samples with a threshold. Under noise only the
statistic is Gamma(MN, noise_power / MN), which fixes the threshold for a
target false-alarm probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import stats_core
from .airlink import LinkSetup, PowerProfile, blanked_samples, draw_slots
from .errors import DomainError, ParameterError

# complex samples per generated block; bounds memory of Monte Carlo loops
_BLOCK_SAMPLES = 1 << 21


class Hypothesis(str, Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class DetectorCalibration:
    target_pfa: float
    sample_count: int
    noise_power: float
    threshold: float


@dataclass(frozen=True)
class Verdict:
    statistic: float
    decision: Hypothesis


def calibrate(target_pfa: float, sample_count: int, noise_power: float = 1.0) -> DetectorCalibration:
    """Threshold with ``P[Gamma(MN, noise/MN) > threshold] = target_pfa``."""
    if not 0.0 < target_pfa < 1.0:
        raise DomainError(f"target_pfa must lie in (0, 1), got {target_pfa}")
    if sample_count < 1:
        raise ParameterError("sample_count must be >= 1")
    law = stats_core.GammaParams(sample_count, noise_power / sample_count)
    return DetectorCalibration(target_pfa, int(sample_count), noise_power,
                               stats_core.gamma_isf(target_pfa, law))


def test_statistic(samples, sample_count: int | None = None):
    """Mean energy ``||r||^2 / MN`` over the last axis of ``samples``."""
    r = np.asarray(samples)
    if r.shape[-1] == 0:
        raise ParameterError("no blanked samples")
    if sample_count is not None and r.shape[-1] != sample_count:
        raise ParameterError(f"expected {sample_count} samples, got {r.shape[-1]}")
    if np.iscomplexobj(r):
        energy = np.einsum("...i,...i->...", r.real, r.real) + np.einsum("...i,...i->...", r.imag, r.imag)
    else:
        energy = np.einsum("...i,...i->...", r, r)
    stat = energy / r.shape[-1]
    return float(stat) if np.ndim(stat) == 0 else stat


test_statistic.__test__ = False  # keep pytest from collecting it


def decide(statistic: float, cal: DetectorCalibration) -> Verdict:
    # a statistic equal to the threshold is resolved to H0
    return Verdict(statistic, Hypothesis.H1 if statistic > cal.threshold else Hypothesis.H0)


def block_size(setup: LinkSetup) -> int:
    # per-slot footprint: observed samples or the pattern masks, whichever is larger
    cfg = setup.slot
    per_slot = max(setup.sample_count, cfg.pattern_periods * cfg.subcarriers)
    return max(1, _BLOCK_SAMPLES // per_slot)


def simulate_statistics(setup: LinkSetup, trials: int, rng: np.random.Generator,
                        blank_key: int, first_slot: int = 0) -> np.ndarray:
    """Detector statistic for ``trials`` consecutive slots of an end-to-end simulation."""
    if setup.sample_count == 0:
        raise ParameterError("detection needs at least one blanked resource")
    out = np.empty(trials)
    step = block_size(setup)
    for start in range(0, trials, step):
        n = min(step, trials - start)
        batch = draw_slots(setup, rng, blank_key, first_slot + start, n)
        out[start:start + n] = test_statistic(blanked_samples(setup, batch, rng))
    return out


@dataclass(frozen=True)
class EmpiricalRates:
    fa_rate: float
    md_rate: float
    fa_stderr: float
    md_stderr: float
    trials: int


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def empirical_rates(setup: LinkSetup, target_pfa: float, trials: int,
                    rng: np.random.Generator, blank_key: int | None = None) -> EmpiricalRates:
    """False-alarm and missed-detection frequencies over independent slots.

    H0 slots use the same grid with the jammer switched off entirely, on their
    own child stream, so the FA estimate does not depend on jammer settings.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    cal = calibrate(target_pfa, setup.sample_count, setup.slot.noise_power)
    h0_rng, h1_rng = rng.spawn(2)
    if blank_key is None:
        blank_key = int(rng.integers(0, 2**63))
    quiet = LinkSetup(setup.slot, setup.channel, PowerProfile(setup.power.ue_total, 0.0),
                      setup.blank_count, 0)
    fa = float(np.mean(simulate_statistics(quiet, trials, h0_rng, blank_key) > cal.threshold))
    md = float(np.mean(simulate_statistics(setup, trials, h1_rng, blank_key) <= cal.threshold))
    return EmpiricalRates(fa, md, binomial_stderr(fa, trials), binomial_stderr(md, trials), trials)
