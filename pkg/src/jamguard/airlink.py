"""OFDM resource grid, blanking/jamming patterns, channels and received samples.

Blanking patterns come from a keyed counter-based generator so that the base
station and the UE, sharing the key, derive the same pattern for any slot
without exchanging state. Jammer patterns, channels and noise come from an
ordinary ``numpy.random.Generator`` stream supplied by the caller.

At PRB granularity a pattern is fixed for the whole slot (all ``symbols``
OFDM symbols). At RE granularity the pattern is redrawn on every symbol and
the pattern index counts symbols, ``slot * symbols + n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError


class Granularity(str, Enum):
    RE = "re"
    PRB = "prb"


class ChannelKind(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class SlotConfig:
    subcarriers: int = 300
    prb_size: int = 12
    symbols: int = 14
    noise_power: float = 1.0
    granularity: Granularity = Granularity.PRB

    def __post_init__(self):
        object.__setattr__(self, "granularity", Granularity(self.granularity))
        if self.subcarriers < 1 or self.prb_size < 1 or self.symbols < 1:
            raise ParameterError("subcarriers, prb_size and symbols must be positive")
        if self.subcarriers % self.prb_size:
            raise ParameterError(
                f"subcarriers ({self.subcarriers}) not divisible by prb_size ({self.prb_size})"
            )
        if not self.noise_power > 0:
            raise ParameterError("noise_power must be positive")

    @property
    def prb_count(self) -> int:
        return self.subcarriers // self.prb_size

    @property
    def resources(self) -> int:
        """Number of selectable resources per pattern: PRBs or subcarriers."""
        return self.prb_count if self.granularity is Granularity.PRB else self.subcarriers

    @property
    def resource_width(self) -> int:
        """Subcarriers covered by one selectable resource."""
        return self.prb_size if self.granularity is Granularity.PRB else 1

    @property
    def pattern_periods(self) -> int:
        """Independent patterns per slot: one at PRB level, one per symbol at RE level."""
        return 1 if self.granularity is Granularity.PRB else self.symbols


@dataclass(frozen=True)
class PatternSet:
    slot_index: int
    indices: tuple[int, ...]

    @property
    def cardinality(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class ChannelModel:
    kind: ChannelKind = ChannelKind.AWGN
    ue_gain: complex = 1.0
    jam_gain: complex = 1.0
    ue_var: float = 1.0
    jam_var: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.ue_var <= 0 or self.jam_var <= 0:
            raise ParameterError("Rayleigh variances must be positive")

    @classmethod
    def awgn(cls, ue_gain: complex = 1.0, jam_gain: complex = 1.0) -> "ChannelModel":
        return cls(ChannelKind.AWGN, ue_gain=ue_gain, jam_gain=jam_gain)

    @classmethod
    def rayleigh(cls, ue_var: float = 1.0, jam_var: float = 1.0) -> "ChannelModel":
        return cls(ChannelKind.RAYLEIGH, ue_var=ue_var, jam_var=jam_var)

    @property
    def ue_energy(self) -> float:
        """Average UE channel energy E_h."""
        return abs(self.ue_gain) ** 2 if self.kind is ChannelKind.AWGN else self.ue_var

    @property
    def jam_energy(self) -> float:
        """Average jammer channel energy E_g."""
        return abs(self.jam_gain) ** 2 if self.kind is ChannelKind.AWGN else self.jam_var


@dataclass
class ChannelRealization:
    ue_gains: np.ndarray
    jam_gains: np.ndarray


@dataclass(frozen=True)
class PowerProfile:
    """Total UE and jammer power per OFDM symbol (linear)."""

    ue_total: float
    jam_total: float = 0.0

    def __post_init__(self):
        if self.ue_total < 0 or self.jam_total < 0:
            raise ParameterError("powers must be nonnegative")

    @classmethod
    def from_snr_db(cls, cfg: SlotConfig, snr_ue_db: float, snr_j_db: float | None) -> "PowerProfile":
        """SNR is total power over ``S * noise_power``; ``snr_j_db=None`` means no jammer."""
        scale = cfg.subcarriers * cfg.noise_power
        jam = 0.0 if snr_j_db is None else scale * 10.0 ** (snr_j_db / 10.0)
        return cls(scale * 10.0 ** (snr_ue_db / 10.0), jam)

    def snr_ue_db(self, cfg: SlotConfig) -> float:
        return 10.0 * math.log10(self.ue_total / (cfg.subcarriers * cfg.noise_power))

    def snr_j_db(self, cfg: SlotConfig) -> float:
        if self.jam_total == 0:
            return -math.inf
        return 10.0 * math.log10(self.jam_total / (cfg.subcarriers * cfg.noise_power))


@dataclass(frozen=True)
class LinkSetup:
    """One operating point: grid, channel, powers, and pattern sizes in resources."""

    slot: SlotConfig
    channel: ChannelModel
    power: PowerProfile
    blank_count: int
    jam_count: int

    def __post_init__(self):
        r = self.slot.resources
        if not 0 <= self.blank_count <= r:
            raise ParameterError(f"blank_count must lie in [0, {r}], got {self.blank_count}")
        if not 0 <= self.jam_count <= r:
            raise ParameterError(f"jam_count must lie in [0, {r}], got {self.jam_count}")
        if self.blank_count == r and self.power.ue_total > 0:
            raise ParameterError("cannot blank every resource while the UE transmits")

    @property
    def blanked_subcarriers(self) -> int:
        return self.blank_count * self.slot.resource_width

    @property
    def jammed_subcarriers(self) -> int:
        return self.jam_count * self.slot.resource_width

    @property
    def sample_count(self) -> int:
        """Blanked REs observed by the detector per slot (M * N)."""
        return self.blanked_subcarriers * self.slot.symbols

    @property
    def ue_power_per_subcarrier(self) -> float:
        data = self.slot.subcarriers - self.blanked_subcarriers
        return self.power.ue_total / data if data else 0.0

    @property
    def jam_power_per_subcarrier(self) -> float:
        if self.jam_count == 0:
            return 0.0
        return self.power.jam_total / self.jammed_subcarriers

    def with_power(self, power: PowerProfile) -> "LinkSetup":
        return LinkSetup(self.slot, self.channel, power, self.blank_count, self.jam_count)


# -- keyed counter-based generator -----------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STEP = np.uint64(0xD6E8FEB86659FD93)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def keyed_uniform(key: int, counters, step: int) -> np.ndarray:
    """Uniform [0, 1) doubles, a pure function of ``(key, counter, step)``."""
    c = np.asarray(counters, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64(np.uint64(key) ^ _mix64(c * _GOLDEN + _GOLDEN))
        z = _mix64(z + np.uint64(step) * _STEP + _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def keyed_subsets(resources: int, count: int, key: int, counters) -> np.ndarray:
    """Sorted size-``count`` subsets of ``range(resources)``, one row per counter.

    Partial Fisher-Yates: step ``i`` swaps position ``i`` with a uniform
    position in ``[i, resources)`` drawn from the keyed generator.
    """
    counters = np.atleast_1d(np.asarray(counters, dtype=np.int64))
    n = counters.size
    perm = np.tile(np.arange(resources, dtype=np.int64), (n, 1))
    rows = np.arange(n)
    for i in range(count):
        u = keyed_uniform(key, counters, i)
        j = i + np.minimum((u * (resources - i)).astype(np.int64), resources - i - 1)
        head = perm[:, i].copy()
        perm[:, i] = perm[rows, j]
        perm[rows, j] = head
    return np.sort(perm[:, :count], axis=1)


def _check_count(cfg: SlotConfig, count: int, what: str):
    if not 0 <= count <= cfg.resources:
        raise ParameterError(f"{what} must lie in [0, {cfg.resources}], got {count}")


def draw_blanking(cfg: SlotConfig, blank_count: int, key: int, slot_index: int) -> PatternSet:
    """Blanked resources for one pattern period, determined by ``(key, slot_index)``."""
    _check_count(cfg, blank_count, "blank_count")
    idx = keyed_subsets(cfg.resources, blank_count, key, [slot_index])[0]
    return PatternSet(slot_index, tuple(int(i) for i in idx))


def draw_jam_pattern(cfg: SlotConfig, jam_count: int, rng: np.random.Generator,
                     slot_index: int = 0) -> PatternSet:
    _check_count(cfg, jam_count, "jam_count")
    idx = np.sort(rng.choice(cfg.resources, size=jam_count, replace=False))
    return PatternSet(slot_index, tuple(int(i) for i in idx))


def realize_channel(model: ChannelModel, cfg: SlotConfig, rng: np.random.Generator) -> ChannelRealization:
    """Per-PRB gains for one slot."""
    batch = realize_channel_batch(model, cfg, rng, 1)
    return ChannelRealization(batch.ue_gains[0], batch.jam_gains[0])


def _complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    z = rng.standard_normal((2, *shape))
    return math.sqrt(var / 2.0) * (z[0] + 1j * z[1])


def realize_channel_batch(model: ChannelModel, cfg: SlotConfig, rng: np.random.Generator,
                          n: int) -> ChannelRealization:
    """Per-PRB gains for ``n`` slots, shape ``(n, P)``; block fading over each PRB and slot."""
    shape = (n, cfg.prb_count)
    if model.kind is ChannelKind.AWGN:
        return ChannelRealization(
            np.full(shape, complex(model.ue_gain)), np.full(shape, complex(model.jam_gain))
        )
    return ChannelRealization(
        _complex_normal(rng, shape, model.ue_var), _complex_normal(rng, shape, model.jam_var)
    )


def _pattern_subcarriers(cfg: SlotConfig, resource_idx: np.ndarray) -> np.ndarray:
    """Expand resource indices (..., k) to sorted subcarrier indices (..., k * width)."""
    w = cfg.resource_width
    if w == 1:
        return resource_idx
    sc = resource_idx[..., :, None] * w + np.arange(w)
    return sc.reshape(*resource_idx.shape[:-1], -1)


def received_blanked_samples(cfg: SlotConfig, blanking: PatternSet, jamming: PatternSet,
                             realization: ChannelRealization, profile: PowerProfile,
                             rng: np.random.Generator) -> np.ndarray:
    """Received samples on the blanked REs of one slot, flattened symbol by symbol.

    ``blanking`` and ``jamming`` are held for every symbol of the slot.
    """
    blank_sc = _pattern_subcarriers(cfg, np.asarray(blanking.indices, dtype=np.int64))
    jam_sc = _pattern_subcarriers(cfg, np.asarray(jamming.indices, dtype=np.int64))
    jam_var = profile.jam_total / jam_sc.size if jam_sc.size else 0.0
    hot = np.isin(blank_sc, jam_sc)
    g = np.repeat(realization.jam_gains, cfg.prb_size)[blank_sc]
    shape = (cfg.symbols, blank_sc.size)
    r = _complex_normal(rng, shape, cfg.noise_power)
    if jam_var > 0 and hot.any():
        r = r + hot * g * _complex_normal(rng, shape, jam_var)
    return r.reshape(-1)


@dataclass
class SlotBatch:
    """Patterns and channels for ``n`` consecutive slots.

    ``blank_sc``: (n, T, M) sorted blanked subcarrier indices, T = pattern periods.
    ``jam_mask``: (n, T, S) jammed subcarriers.
    ``ue_gain`` / ``jam_gain``: (n, S) per-subcarrier gains, constant within a PRB.
    """

    blank_sc: np.ndarray
    jam_mask: np.ndarray
    ue_gain: np.ndarray
    jam_gain: np.ndarray
    first_slot: int = 0
    _blank_mask: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.blank_sc.shape[0]

    @property
    def blank_mask(self) -> np.ndarray:
        if self._blank_mask is None:
            n, t, _ = self.blank_sc.shape
            mask = np.zeros((n, t, self.jam_mask.shape[-1]), dtype=bool)
            np.put_along_axis(mask, self.blank_sc, True, axis=-1)
            self._blank_mask = mask
        return self._blank_mask


def _random_subset_mask(rng: np.random.Generator, shape, resources: int, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros((*shape, resources), dtype=bool)
    if count == resources:
        return np.ones((*shape, resources), dtype=bool)
    order = rng.random((*shape, resources)).argsort(axis=-1)
    mask = np.zeros((*shape, resources), dtype=bool)
    np.put_along_axis(mask, order[..., :count], True, axis=-1)
    return mask


def draw_slots(setup: LinkSetup, rng: np.random.Generator, blank_key: int,
               first_slot: int, n: int) -> SlotBatch:
    """Blanking, jamming and channel state for slots ``first_slot .. first_slot + n - 1``."""
    cfg = setup.slot
    t = cfg.pattern_periods
    counters = (np.arange(first_slot, first_slot + n, dtype=np.int64)[:, None] * t
                + np.arange(t, dtype=np.int64)).reshape(-1)
    blank_res = keyed_subsets(cfg.resources, setup.blank_count, blank_key, counters)
    blank_sc = _pattern_subcarriers(cfg, blank_res.reshape(n, t, -1))

    jam_res = _random_subset_mask(rng, (n, t), cfg.resources, setup.jam_count)
    jam_mask = np.repeat(jam_res, cfg.resource_width, axis=-1)

    chan = realize_channel_batch(setup.channel, cfg, rng, n)
    return SlotBatch(
        blank_sc=blank_sc,
        jam_mask=jam_mask,
        ue_gain=np.repeat(chan.ue_gains, cfg.prb_size, axis=-1),
        jam_gain=np.repeat(chan.jam_gains, cfg.prb_size, axis=-1),
        first_slot=first_slot,
    )


def overlap_counts(setup: LinkSetup, batch: SlotBatch) -> np.ndarray:
    """Number of blanked REs that are also jammed, per slot (the overlap E)."""
    hot = np.take_along_axis(batch.jam_mask, batch.blank_sc, axis=-1)
    per_period = hot.sum(axis=(1, 2))
    return per_period * (setup.slot.symbols // setup.slot.pattern_periods)


def blanked_samples(setup: LinkSetup, batch: SlotBatch, rng: np.random.Generator) -> np.ndarray:
    """Received samples on blanked REs for every slot of ``batch``, shape (n, N * M).

    Noise is CN(0, noise_power); jammed REs add a CN(0, P_J / L) jamming
    sample times the jammer gain. Blanked REs carry no UE signal.
    """
    cfg = setup.slot
    n, t, m = batch.blank_sc.shape
    reps = cfg.symbols // t
    shape = (n, cfg.symbols, m)
    r = _complex_normal(rng, shape, cfg.noise_power)
    jam_var = setup.jam_power_per_subcarrier
    if jam_var > 0 and m > 0:
        hot = np.take_along_axis(batch.jam_mask, batch.blank_sc, axis=-1)
        g = np.take_along_axis(np.broadcast_to(batch.jam_gain[:, None, :], batch.jam_mask.shape),
                               batch.blank_sc, axis=-1)
        coef = np.repeat(hot * g, reps, axis=1)
        r += coef * _complex_normal(rng, shape, jam_var)
    return r.reshape(n, -1)
