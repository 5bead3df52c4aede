"""Smart-jammer strategies.

The jammer knows the grid format, the number of blanked resources, the
detector threshold, the noise power and average channel energies, but not the
instantaneous channel or the blanking pattern. Each strategy is a
one-dimensional exhaustive search, ties going to the smallest count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analytic, kpi
from .airlink import SlotConfig
from .detector import calibrate
from .errors import ParameterError


@dataclass(frozen=True)
class JammerKnowledge:
    slot: SlotConfig
    blank_count: int
    target_pfa: float
    jam_total: float
    ue_total: float
    ue_energy: float = 1.0
    jam_energy: float = 1.0
    packet: kpi.PacketSpec = field(default_factory=kpi.PacketSpec)
    packets: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if self.blank_count < 0 or self.blank_count >= self.slot.resources:
            raise ParameterError("blank_count must leave at least one data resource")
        if self.threshold is None and self.blank_count > 0:
            mn = self.blank_count * self.slot.resource_width * self.slot.symbols
            object.__setattr__(self, "threshold",
                               calibrate(self.target_pfa, mn, self.slot.noise_power).threshold)

    @property
    def packet_count(self) -> int:
        """F, the number of packets the jammer assumes per slot (default: one per data PRB)."""
        if self.packets is not None:
            return self.packets
        blanked_prbs = self.blank_count * self.slot.resource_width // self.slot.prb_size
        return self.slot.prb_count - blanked_prbs


@dataclass(frozen=True)
class StrategyOutcome:
    chosen_count: int
    objective_value: float
    objective_curve: list[tuple[int, float]]


def _pick(curve: list[tuple[int, float]]) -> StrategyOutcome:
    values = np.array([v for _, v in curve])
    best = int(np.argmax(values))  # first maximum, i.e. the smallest count
    return StrategyOutcome(curve[best][0], float(values[best]), curve)


def md_curve(knowledge: JammerKnowledge) -> list[tuple[int, float]]:
    k = knowledge
    return [
        (count, analytic.pmd_gaussian_jammer(k.slot, k.blank_count, count, k.target_pfa, k.jam_total,
                                             k.jam_energy, threshold=k.threshold))
        for count in range(1, k.slot.resources + 1)
    ]


def optimize_md(knowledge: JammerKnowledge) -> StrategyOutcome:
    """Number of jammed resources maximizing the analytic MD probability."""
    if knowledge.blank_count == 0:
        raise ParameterError("without blanking there is nothing to evade")
    return _pick(md_curve(knowledge))


def se_min_allocation(jam_total: float, subcarriers: int) -> np.ndarray:
    """SE-minimizing split of the jamming budget: uniform over all subcarriers.

    The per-subcarrier rate ``log2(1 + a / (n + x))`` is convex in the
    jamming power ``x``, so under a sum constraint the symmetric point is the
    minimum.
    """
    if jam_total < 0:
        raise ParameterError("jam_total must be nonnegative")
    return np.full(subcarriers, jam_total / subcarriers)


def se_objective(allocation, ue_rx_power: float, noise_power: float, jam_energy: float = 1.0) -> float:
    """Sum rate seen by the jammer when it spreads ``allocation`` over the subcarriers."""
    p = np.asarray(allocation, dtype=float)
    return float(np.sum(np.log2(1.0 + ue_rx_power / (noise_power + p * jam_energy))))


def packet_bler_under_attack(knowledge: JammerKnowledge, attacked: int) -> float:
    """BLER of an attacked packet from average channel energies.

    The budget is split evenly over ``attacked`` packets of ``S / F``
    subcarriers each.
    """
    k = knowledge
    s = k.slot.subcarriers
    f = k.packet_count
    data_sc = s - k.blank_count * k.slot.resource_width
    ue_sc = k.ue_total / data_sc
    jam_sc = k.jam_total / attacked / (s / f)
    sinr = kpi.sinr_re(ue_sc, np.sqrt(k.ue_energy), jam_sc, np.sqrt(k.jam_energy), k.slot.noise_power)
    return kpi.bler_packet(sinr, k.packet)


def optimize_bler(knowledge: JammerKnowledge) -> StrategyOutcome:
    """Number of attacked packets maximizing ``L_F * BLER_pkt(P_J / L_F)``."""
    f = knowledge.packet_count
    if f < 1:
        raise ParameterError("need at least one packet")
    curve = [(lf, lf * packet_bler_under_attack(knowledge, lf)) for lf in range(1, f + 1)]
    return _pick(curve)
