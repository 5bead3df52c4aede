"""Scenario engine: ROC, SE/BLER sweeps, jammer optimum, trade-offs, validation.

Monte Carlo trials are cut into fixed-size chunks. Chunk ``c`` of point
``p`` in scenario ``s`` draws from ``SeedSequence(seed, spawn_key=(s, p, c))``
and blanking uses a per-point key, so every number depends only on the master
seed and the configuration, never on how many worker threads ran the chunks.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import analytic, jammer, kpi
from .airlink import (ChannelKind, ChannelModel, Granularity, LinkSetup, PowerProfile, SlotConfig,
                      draw_slots)
from .detector import binomial_stderr, calibrate, simulate_statistics
from .errors import ParameterError

log = logging.getLogger(__name__)

CHUNK_TRIALS = 8192
MAX_TRIALS = 10**7
_BLANK_TAG = 2**32 - 1


class ScenarioKind(str, Enum):
    ROC = "roc"
    SE = "se"
    BLER = "bler"
    MD_OPT = "md-opt"
    TRADEOFF_SE = "tradeoff-se"
    TRADEOFF_BLER = "tradeoff-bler"
    VALIDATE = "validate"


_SCENARIO_IDS = {kind: i for i, kind in enumerate(ScenarioKind)}
_PFA_GRID = tuple(float(f"{10.0 ** e:.6g}") for e in np.linspace(-6, -1, 11))
_SNR_SWEEP = tuple(float(x) for x in np.arange(-20, 21, 2))

# kind -> defaults for the sweep fields that depend on the scenario
_KIND_DEFAULTS = {
    ScenarioKind.ROC: dict(mp=(1, 5), lp=(5, 21), channels=("awgn", "rayleigh"), snr_j_db=(0.0,), pfa=_PFA_GRID),
    ScenarioKind.SE: dict(mp=(5,), lp=(5, 21), channels=("awgn", "rayleigh"), snr_j_db=_SNR_SWEEP, pfa=(1e-3,)),
    ScenarioKind.BLER: dict(mp=(5,), lp=(5, 21), channels=("awgn", "rayleigh"), snr_j_db=_SNR_SWEEP, pfa=(1e-3,)),
    ScenarioKind.MD_OPT: dict(mp=(5,), lp=(), channels=("awgn",), snr_j_db=(-10.0, 0.0), pfa=_PFA_GRID),
    ScenarioKind.TRADEOFF_SE: dict(mp=(5,), lp=(), channels=("awgn",), snr_j_db=(0.0, 10.0, 20.0), pfa=(1e-3,)),
    ScenarioKind.TRADEOFF_BLER: dict(mp=(5,), lp=(), channels=("awgn",), snr_j_db=(0.0, 10.0, 20.0), pfa=(1e-3,)),
    ScenarioKind.VALIDATE: dict(mp=(), lp=(), channels=("awgn",), snr_j_db=(), pfa=()),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario parameters (dB values kept for reporting only).

    Empty ``lp`` means every count ``1..P``.
    """

    kind: ScenarioKind
    subcarriers: int = 300
    prb_size: int = 12
    symbols: int = 14
    noise_power: float = 1.0
    snr_ue_db: float = 10.0
    rate: float = 0.48
    trials: int = 100_000
    seed: int = 0
    mp: tuple[int, ...] = (5,)
    lp: tuple[int, ...] = ()
    channels: tuple[str, ...] = ("awgn",)
    snr_j_db: tuple[float, ...] = (0.0,)
    pfa: tuple[float, ...] = (1e-3,)
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        self.slot  # geometry validation
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        for p in self.pfa:
            if not 0 < p < 1:
                raise ParameterError(f"P_FA values must lie in (0, 1), got {p}")
        p_count = self.subcarriers // self.prb_size
        for m in self.mp:
            if not 1 <= m < p_count:
                raise ParameterError(f"M_P must lie in [1, {p_count - 1}], got {m}")
        for lp in self.lp:
            if not 1 <= lp <= p_count:
                raise ParameterError(f"L_P must lie in [1, {p_count}], got {lp}")
        for ch in self.channels:
            ChannelKind(ch)
        if self.kind is not ScenarioKind.VALIDATE:
            if not (self.snr_j_db and self.pfa and self.mp and self.channels):
                raise ParameterError("sweep axes must be nonempty")

    @classmethod
    def defaults(cls, kind, **overrides) -> "ScenarioConfig":
        kind = ScenarioKind(kind)
        fields = dict(_KIND_DEFAULTS[kind])
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **fields)

    @property
    def slot(self) -> SlotConfig:
        return SlotConfig(self.subcarriers, self.prb_size, self.symbols, self.noise_power, Granularity.PRB)

    @property
    def jam_counts(self) -> tuple[int, ...]:
        return self.lp or tuple(range(1, self.slot.prb_count + 1))

    @property
    def packet(self) -> kpi.PacketSpec:
        return kpi.PacketSpec(self.rate, self.prb_size * self.symbols)


@dataclass(frozen=True)
class ScenarioRecord:
    x_label: str
    x: float
    series: str
    y: float
    y_stderr: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if self.y_stderr is not None:
            object.__setattr__(self, "y_stderr", float(self.y_stderr))


@dataclass
class ScenarioResult:
    kind: ScenarioKind
    records: list[ScenarioRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    passed: bool = True

    def add(self, *args, **kwargs):
        self.records.append(ScenarioRecord(*args, **kwargs))

    def series(self, name: str) -> list[ScenarioRecord]:
        return [r for r in self.records if r.series == name]

    def warn(self, msg: str):
        log.warning(msg)
        self.warnings.append(msg)


# -- streams and chunked execution -------------------------------------------

def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("JAMGUARD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_stream(seed: int, scenario: int, point: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(scenario, point, chunk)))


def blanking_key(seed: int, scenario: int, point: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(scenario, point, _BLANK_TAG))
    return int(ss.generate_state(1, np.uint64)[0])


def run_chunks(fn: Callable[[np.random.Generator, int, int], np.ndarray], trials: int, seed: int,
               scenario: int, point: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``fn(rng, first_slot, n)`` over fixed chunks and concatenate in order."""
    starts = list(range(0, trials, CHUNK_TRIALS))

    def one(c: int) -> np.ndarray:
        start = starts[c]
        n = min(CHUNK_TRIALS, trials - start)
        return fn(chunk_stream(seed, scenario, point, c), start, n)

    workers = min(worker_count(threads), len(starts))
    if workers <= 1:
        parts = [one(c) for c in range(len(starts))]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, range(len(starts))))
    return np.concatenate(parts)


def trials_for_pfa(pfa: float, base: int) -> tuple[int, bool]:
    """Trials needed to resolve a false-alarm rate; ``True`` when capped."""
    wanted = max(base, math.ceil(100.0 / pfa))
    return min(wanted, MAX_TRIALS), wanted > MAX_TRIALS


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    if n < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


def _channel(name: str) -> ChannelModel:
    return ChannelModel.awgn() if ChannelKind(name) is ChannelKind.AWGN else ChannelModel.rayleigh()


def _setup(cfg: ScenarioConfig, channel: str, mp: int, lp: int, snr_j_db: float | None) -> LinkSetup:
    slot = cfg.slot
    return LinkSetup(slot, _channel(channel), PowerProfile.from_snr_db(slot, cfg.snr_ue_db, snr_j_db), mp, lp)


class _Points:
    """Hands out consecutive point indices for stream derivation."""

    def __init__(self):
        self.next = 0

    def __call__(self) -> int:
        self.next += 1
        return self.next - 1


def _statistics(cfg: ScenarioConfig, setup: LinkSetup, point: int, trials: int | None = None) -> np.ndarray:
    sid = _SCENARIO_IDS[cfg.kind]
    key = blanking_key(cfg.seed, sid, point)
    return run_chunks(lambda rng, start, n: simulate_statistics(setup, n, rng, key, start),
                      trials or cfg.trials, cfg.seed, sid, point, cfg.threads)


def _kpi_values(cfg: ScenarioConfig, setup: LinkSetup, point: int, metric: str) -> np.ndarray:
    sid = _SCENARIO_IDS[cfg.kind]
    key = blanking_key(cfg.seed, sid, point)
    packet = cfg.packet

    def fn(rng, start, n):
        batch = draw_slots(setup, rng, key, start, n)
        if metric == "se":
            return kpi.slot_spectral_efficiency(setup, batch)
        return kpi.slot_packet_bler(setup, batch, packet)

    return run_chunks(fn, cfg.trials, cfg.seed, sid, point, cfg.threads)


# -- scenarios -----------------------------------------------------------------

def run_roc(cfg: ScenarioConfig) -> ScenarioResult:
    """MD probability versus target FA for each (M_P, L_P, channel)."""
    res = ScenarioResult(cfg.kind)
    points = _Points()
    snr_j = cfg.snr_j_db[0]
    for mp in cfg.mp:
        for lp in cfg.jam_counts:
            for ch in cfg.channels:
                setup = _setup(cfg, ch, mp, lp, snr_j)
                label = f"M_P={mp}, L_P={lp}, {ch.upper()}"
                stats = _statistics(cfg, setup, points())
                for pfa in cfg.pfa:
                    thr = calibrate(pfa, setup.sample_count, cfg.noise_power).threshold
                    misses = int(np.count_nonzero(stats <= thr))
                    md = misses / stats.size
                    res.add("P_FA", pfa, f"{label}, Monte Carlo", md, binomial_stderr(md, stats.size))
                    if misses < 10:
                        res.warn(f"{label}: only {misses} missed detections at P_FA={pfa:g}; "
                                 f"increase trials ({stats.size}) to resolve P_MD")
                if ChannelKind(ch) is ChannelKind.AWGN:
                    for pfa in cfg.pfa:
                        md = analytic.pmd_gaussian_jammer(setup.slot, mp, lp, pfa, setup.power.jam_total)
                        res.add("P_FA", pfa, f"{label}, analytic", md)
    return res


def run_se_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    """SE versus SNR_J, with the no-blanking, no-jamming upper bound."""
    return _kpi_sweep(cfg, "se")


def run_bler_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    """Slot BLER versus SNR_J, with the blanking-only baseline."""
    return _kpi_sweep(cfg, "bler")


def _kpi_sweep(cfg: ScenarioConfig, metric: str) -> ScenarioResult:
    res = ScenarioResult(cfg.kind)
    points = _Points()
    mp = cfg.mp[0]
    for ch in cfg.channels:
        if metric == "se":
            ref = _setup(cfg, ch, 0, 0, None)
            ref_label = f"no blanking, no jamming, {ch.upper()}"
        else:
            ref = _setup(cfg, ch, mp, 0, None)
            ref_label = f"M_P={mp}, no jamming, {ch.upper()}"
        y, se = _mean_stderr(_kpi_values(cfg, ref, points(), metric))
        for snr in cfg.snr_j_db:
            res.add("SNR_J [dB]", snr, ref_label, y, se)
        for lp in cfg.jam_counts:
            label = f"M_P={mp}, L_P={lp}, {ch.upper()}"
            for snr in cfg.snr_j_db:
                y, se = _mean_stderr(_kpi_values(cfg, _setup(cfg, ch, mp, lp, snr), points(), metric))
                res.add("SNR_J [dB]", snr, label, y, se)
    return res


def run_md_opt(cfg: ScenarioConfig) -> ScenarioResult:
    """Jammer-optimal MD probability and the L_P achieving it, versus target FA."""
    res = ScenarioResult(cfg.kind)
    slot = cfg.slot
    mp = cfg.mp[0]
    ch = _channel(cfg.channels[0])
    for snr in cfg.snr_j_db:
        power = PowerProfile.from_snr_db(slot, cfg.snr_ue_db, snr)
        for pfa in cfg.pfa:
            know = jammer.JammerKnowledge(slot, mp, pfa, power.jam_total, power.ue_total,
                                          ch.ue_energy, ch.jam_energy)
            best = jammer.optimize_md(know)
            res.add("P_FA", pfa, f"SNR_J={snr:g} dB, optimal P_MD", best.objective_value)
            res.add("P_FA", pfa, f"SNR_J={snr:g} dB, optimal L_P", float(best.chosen_count))
    return res


def run_tradeoff(cfg: ScenarioConfig, metric: str | None = None) -> ScenarioResult:
    """Analytic MD probability and Monte Carlo KPI for every L_P, per SNR_J."""
    if metric is None:
        metric = "se" if cfg.kind is ScenarioKind.TRADEOFF_SE else "bler"
    name = "SE" if metric == "se" else "BLER"
    res = ScenarioResult(cfg.kind)
    points = _Points()
    mp = cfg.mp[0]
    pfa = cfg.pfa[0]
    ch = cfg.channels[0]
    for snr in cfg.snr_j_db:
        for lp in cfg.jam_counts:
            setup = _setup(cfg, ch, mp, lp, snr)
            md = analytic.pmd_gaussian_jammer(setup.slot, mp, lp, pfa, setup.power.jam_total,
                                              setup.channel.jam_energy)
            y, se = _mean_stderr(_kpi_values(cfg, setup, points(), metric))
            res.add("L_P", lp, f"SNR_J={snr:g} dB, P_MD (analytic)", md)
            res.add("L_P", lp, f"SNR_J={snr:g} dB, {name} (Monte Carlo)", y, se)
    return res


@dataclass(frozen=True)
class DeskCase:
    subcarriers: int
    prb_size: int
    symbols: int
    blank: int
    jam: int
    snr_j_db: float | None
    pfa: float
    granularity: Granularity = Granularity.PRB

    @property
    def slot(self) -> SlotConfig:
        return SlotConfig(self.subcarriers, self.prb_size, self.symbols, 1.0, self.granularity)

    def describe(self) -> str:
        snr = "off" if self.snr_j_db is None else f"{self.snr_j_db:g} dB"
        return (f"S={self.subcarriers} S_P={self.prb_size} N={self.symbols} "
                f"{self.granularity.value.upper()} M={self.blank} L={self.jam} SNR_J={snr} P_FA={self.pfa:g}")


# Twelve small grids; RE-granularity cases use N=1 where the grid-wide law is exact.
DESK_GRID: tuple[DeskCase, ...] = (
    DeskCase(12, 1, 2, 3, 4, 0.0, 1e-2),
    DeskCase(12, 1, 2, 3, 4, None, 1e-2),
    DeskCase(12, 1, 2, 3, 12, 0.0, 1e-2),
    DeskCase(24, 2, 2, 2, 3, -3.0, 1e-1),
    DeskCase(24, 4, 1, 1, 2, 3.0, 1e-2),
    DeskCase(16, 1, 4, 4, 8, -5.0, 1e-1),
    DeskCase(20, 2, 3, 3, 7, 0.0, 1e-2),
    DeskCase(24, 3, 4, 2, 6, -6.0, 1e-2),
    DeskCase(16, 4, 1, 4, 6, 0.0, 1e-2, Granularity.RE),
    DeskCase(24, 1, 1, 6, 18, -3.0, 1e-1, Granularity.RE),
    DeskCase(8, 1, 4, 2, 1, 6.0, 1e-3),
    DeskCase(24, 12, 2, 1, 1, -10.0, 1e-1),
)


def run_validation(cfg: ScenarioConfig, cases: tuple[DeskCase, ...] = DESK_GRID) -> ScenarioResult:
    """Analytic MD and FA versus end-to-end simulation, 3-sigma check per case."""
    res = ScenarioResult(cfg.kind)
    points = _Points()
    for i, case in enumerate(cases):
        slot = case.slot
        setup = LinkSetup(slot, ChannelModel.awgn(), PowerProfile.from_snr_db(slot, cfg.snr_ue_db, case.snr_j_db),
                          case.blank, case.jam)
        thr = calibrate(case.pfa, setup.sample_count, slot.noise_power).threshold
        md_exp = analytic.pmd_gaussian_jammer(slot, case.blank, case.jam, case.pfa, setup.power.jam_total)
        stats = _statistics(cfg, setup, points())
        md = float(np.mean(stats <= thr))
        md_tol = 3.0 * binomial_stderr(md_exp, stats.size)

        fa_trials, capped = trials_for_pfa(case.pfa, cfg.trials)
        if capped:
            res.warn(f"case {i}: FA trials capped at {fa_trials}")
        quiet = LinkSetup(slot, setup.channel, PowerProfile(setup.power.ue_total, 0.0), case.blank, 0)
        fa = float(np.mean(_statistics(cfg, quiet, points(), fa_trials) > thr))
        fa_tol = 3.0 * binomial_stderr(case.pfa, fa_trials)

        ok = abs(md - md_exp) <= md_tol and abs(fa - case.pfa) <= fa_tol
        res.passed &= ok
        res.add("case", i, "P_MD analytic", md_exp)
        res.add("case", i, "P_MD Monte Carlo", md, binomial_stderr(md, stats.size))
        res.add("case", i, "P_FA Monte Carlo", fa, binomial_stderr(fa, fa_trials))
        res.add("case", i, "pass", 1.0 if ok else 0.0)
        if not ok:
            res.warn(f"case {i} ({case.describe()}): analytic {md_exp:.5f} vs MC {md:.5f}, "
                     f"FA {fa:.5f} vs {case.pfa:g}")
    return res


def run(cfg: ScenarioConfig) -> ScenarioResult:
    dispatch = {
        ScenarioKind.ROC: run_roc,
        ScenarioKind.SE: run_se_sweep,
        ScenarioKind.BLER: run_bler_sweep,
        ScenarioKind.MD_OPT: run_md_opt,
        ScenarioKind.TRADEOFF_SE: run_tradeoff,
        ScenarioKind.TRADEOFF_BLER: run_tradeoff,
        ScenarioKind.VALIDATE: run_validation,
    }
    return dispatch[cfg.kind](cfg)
