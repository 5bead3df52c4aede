"""Link performance metrics: SINR, spectral efficiency and finite-blocklength BLER."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import stats_core
from .airlink import LinkSetup, SlotBatch, draw_slots
from .errors import ParameterError

LOG2E_SQ = math.log2(math.e) ** 2
_BLOCK_RES = 1 << 21


@dataclass(frozen=True)
class PacketSpec:
    rate: float = 0.48
    channel_uses: int = 168
    packets_per_slot: int = 1

    def __post_init__(self):
        if not self.rate > 0:
            raise ParameterError("packet rate must be positive")
        if self.channel_uses < 1 or self.packets_per_slot < 1:
            raise ParameterError("channel_uses and packets_per_slot must be >= 1")


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error."""

    value: float
    stderr: float
    trials: int


def sinr_re(ue_power, ue_gain, jam_power, jam_gain, noise_power):
    """``P_UE |h|^2 / (noise + P_J |g|^2)``, elementwise."""
    out = (np.asarray(ue_power) * np.abs(ue_gain) ** 2
           / (noise_power + np.asarray(jam_power) * np.abs(jam_gain) ** 2))
    return float(out) if np.ndim(out) == 0 else out


def channel_dispersion(sinr):
    s = np.asarray(sinr, dtype=float)
    if np.any(s < 0):
        raise ParameterError("SINR must be nonnegative")
    v = LOG2E_SQ * (1.0 - 1.0 / (1.0 + s) ** 2)
    return float(v) if np.ndim(v) == 0 else v


def bler_packet(sinr, spec: PacketSpec = PacketSpec(), channel_uses=None):
    """Normal-approximation block error probability of a packet.

    ``channel_uses`` overrides ``spec.channel_uses`` and may be an array.
    At zero SINR nothing gets through and the result is 1.
    """
    s = np.asarray(sinr, dtype=float)
    c = np.asarray(spec.channel_uses if channel_uses is None else channel_uses, dtype=float)
    cap = np.log2(1.0 + s)
    v = np.asarray(channel_dispersion(s))
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (cap - spec.rate) * np.sqrt(c / v)
    out = np.where(s > 0, stats_core.gaussian_q(arg), 1.0)
    return float(out) if np.ndim(out) == 0 else out


def sinr_packet(sinrs, axis: int = -1):
    """Mean-capacity equivalent SINR, ``2**mean(log2(1 + SINR_i)) - 1``."""
    s = np.asarray(sinrs, dtype=float)
    if s.shape[axis] == 0:
        raise ParameterError("a packet needs at least one RE")
    out = np.exp2(np.mean(np.log2(1.0 + s), axis=axis)) - 1.0
    if np.ndim(out) == 0:
        # identical inputs must map to themselves exactly
        flat = s.reshape(-1)
        return float(flat[0]) if np.all(flat == flat[0]) else float(out)
    return out


def batch_sinr(setup: LinkSetup, batch: SlotBatch) -> np.ndarray:
    """Per-RE SINR for every pattern period, shape (n, T, S); zero on blanked REs."""
    ue = setup.ue_power_per_subcarrier * np.abs(batch.ue_gain[:, None, :]) ** 2
    jam = batch.jam_mask * (setup.jam_power_per_subcarrier * np.abs(batch.jam_gain[:, None, :]) ** 2)
    sinr = ue / (setup.slot.noise_power + jam)
    return np.where(batch.blank_mask, 0.0, sinr)


def _blocks(setup: LinkSetup, trials: int):
    step = max(1, _BLOCK_RES // (setup.slot.pattern_periods * setup.slot.subcarriers))
    for start in range(0, trials, step):
        yield start, min(step, trials - start)


def _estimate(values: np.ndarray) -> Estimate:
    n = values.size
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(np.mean(values)), stderr, n)


def slot_spectral_efficiency(setup: LinkSetup, batch: SlotBatch) -> np.ndarray:
    """Per-slot SE averaged over all S subcarriers; blanked ones carry zero rate."""
    return np.log2(1.0 + batch_sinr(setup, batch)).mean(axis=(1, 2))


def spectral_efficiency(setup: LinkSetup, trials: int, rng: np.random.Generator,
                        blank_key: int = 0, first_slot: int = 0) -> Estimate:
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    values = np.empty(trials)
    for start, n in _blocks(setup, trials):
        batch = draw_slots(setup, rng, blank_key, first_slot + start, n)
        values[start:start + n] = slot_spectral_efficiency(setup, batch)
    return _estimate(values)


def slot_packet_bler(setup: LinkSetup, batch: SlotBatch, spec: PacketSpec = PacketSpec()) -> np.ndarray:
    """Per-slot BLER averaged over the packets scheduled in that slot.

    One packet per PRB holding at least one data RE. Its SINR is the
    mean-capacity mapping over those REs (a single value under PRB-level
    blanking and block fading) and its size scales ``spec.channel_uses``
    by the fraction of the PRB's REs carrying data.
    """
    cfg = setup.slot
    sinr = batch_sinr(setup, batch)
    data = ~batch.blank_mask
    n, t, _ = sinr.shape
    shape = (n, t, cfg.prb_count, cfg.prb_size)
    cap = np.where(data, np.log2(1.0 + sinr), 0.0).reshape(shape).sum(axis=(1, 3))
    used = data.reshape(shape).sum(axis=(1, 3))
    scheduled = used > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        pkt_sinr = np.where(scheduled, np.exp2(cap / np.maximum(used, 1)) - 1.0, 0.0)
    uses = spec.channel_uses * used / (t * cfg.prb_size)
    bler = np.where(scheduled, bler_packet(pkt_sinr, spec, np.maximum(uses, 1e-300)), 0.0)
    count = scheduled.sum(axis=1)
    return np.where(count > 0, bler.sum(axis=1) / np.maximum(count, 1), 0.0)


def slot_bler(setup: LinkSetup, spec: PacketSpec, trials: int, rng: np.random.Generator,
              blank_key: int = 0, first_slot: int = 0) -> Estimate:
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    values = np.empty(trials)
    for start, n in _blocks(setup, trials):
        batch = draw_slots(setup, rng, blank_key, first_slot + start, n)
        values[start:start + n] = slot_packet_bler(setup, batch, spec)
    return _estimate(values)
