import math

import numpy as np
import pytest
from scipy.stats import norm

from jamguard.airlink import ChannelModel, LinkSetup, PowerProfile, SlotConfig
from jamguard.detector import binomial_stderr, calibrate, simulate_statistics
from jamguard.errors import ParameterError
from jamguard.jammer import (
    JammerKnowledge,
    StrategyOutcome,
    _pick,
    optimize_bler,
    optimize_md,
    se_min_allocation,
    se_objective,
)

FULL_GRID = SlotConfig()


def knowledge(snr_j_db, pfa, slot=FULL_GRID, mp=5, **kw):
    p = PowerProfile.from_snr_db(slot, 10.0, snr_j_db)
    return JammerKnowledge(slot, mp, pfa, p.jam_total, p.ue_total, **kw)


# -- MD strategy --------------------------------------------------------------------

@pytest.mark.parametrize("pfa", [1e-6, 1e-4, 1e-2, 1e-1])
def test_narrowband_at_0db(pfa):
    assert optimize_md(knowledge(0.0, pfa)).chosen_count <= 12


def test_wideband_at_minus_10db():
    assert optimize_md(knowledge(-10.0, 1e-6)).chosen_count >= 13


def test_curve_is_consistent():
    out = optimize_md(knowledge(0.0, 1e-3))
    counts = [c for c, _ in out.objective_curve]
    values = [v for _, v in out.objective_curve]
    assert counts == list(range(1, 26))
    assert out.objective_value == max(values)
    assert out.chosen_count == counts[values.index(max(values))]


def test_ties_go_to_smallest():
    assert _pick([(1, 0.5), (2, 0.7), (3, 0.7)]) == StrategyOutcome(2, 0.7, [(1, 0.5), (2, 0.7), (3, 0.7)])


def test_md_needs_blanking():
    with pytest.raises(ParameterError):
        optimize_md(knowledge(0.0, 1e-3, mp=0))


def test_strong_jammer_avoids_forced_overlap():
    # once L > P - M every slot overlaps; a strong jammer keeps L <= P - M
    for snr in (10.0, 20.0):
        out = optimize_md(knowledge(snr, 1e-3))
        assert out.chosen_count <= 20


def test_desk_scale_argmax_matches_simulation():
    slot = SlotConfig(12, 1, 2)
    k = knowledge(0.0, 1e-2, slot=slot, mp=3)
    out = optimize_md(k)
    thr = calibrate(1e-2, 6).threshold
    n = 100_000
    estimates = []
    for lp in range(1, 13):
        setup = LinkSetup(slot, ChannelModel.awgn(), PowerProfile(k.ue_total, k.jam_total), 3, lp)
        md = float(np.mean(simulate_statistics(setup, n, np.random.default_rng(lp), blank_key=77) <= thr))
        analytic = dict(out.objective_curve)[lp]
        assert abs(md - analytic) <= 3 * binomial_stderr(analytic, n)
        estimates.append(md)
    assert int(np.argmax(estimates)) + 1 == out.chosen_count


# -- SE strategy ------------------------------------------------------------------

def test_se_min_allocation_examples():
    np.testing.assert_array_equal(se_min_allocation(4.0, 4), [1.0, 1.0, 1.0, 1.0])
    np.testing.assert_array_equal(se_min_allocation(0.0, 8), np.zeros(8))
    with pytest.raises(ParameterError):
        se_min_allocation(-1.0, 4)


@pytest.mark.parametrize("budget,s", [(1.0, 3), (300.0, 300), (7.3, 8), (1e6, 25)])
def test_se_min_allocation_budget(budget, s):
    assert math.isclose(se_min_allocation(budget, s).sum(), budget, rel_tol=1e-14)


def test_uniform_allocation_beats_random():
    rng = np.random.default_rng(2025)
    budget, s = 8.0, 8
    uniform = se_objective(se_min_allocation(budget, s), 10.0, 1.0)
    random = budget * rng.dirichlet(np.ones(s), size=10_000)
    # sparse allocations too, not only interior points
    random[:2000] = budget * rng.dirichlet(np.full(s, 0.1), size=2000)
    worst = min(se_objective(a, 10.0, 1.0) for a in random)
    assert worst >= uniform - 1e-9


# -- BLER strategy ----------------------------------------------------------------

def brute_force_bler(ue_total, jam_total, f, data_sc=240, s=300, rate=0.48, uses=168):
    best, best_val = None, -1.0
    for lf in range(1, f + 1):
        sinr = (ue_total / data_sc) / (1.0 + jam_total / lf / (s / f))
        cap = math.log2(1 + sinr)
        v = (1 - 1 / (1 + sinr) ** 2) * math.log2(math.e) ** 2
        val = lf * norm.sf((cap - rate) * math.sqrt(uses / v))
        if val > best_val:
            best, best_val = lf, val
    return best


def bler_knowledge(jam_total):
    return JammerKnowledge(FULL_GRID, 5, 1e-3, jam_total, 3000.0)


def test_default_packet_count():
    assert bler_knowledge(1.0).packet_count == 20
    assert JammerKnowledge(FULL_GRID, 5, 1e-3, 1.0, 3000.0, packets=4).packet_count == 4


def test_bler_huge_budget_attacks_all():
    assert optimize_bler(bler_knowledge(1e9)).chosen_count == 20


def test_bler_negligible_budget_attacks_all():
    assert optimize_bler(bler_knowledge(1e-6)).chosen_count == 20


@pytest.mark.parametrize("jam_total", [610.0, 1500.0, 3000.0, 10_000.0])
def test_bler_matches_brute_force(jam_total):
    out = optimize_bler(bler_knowledge(jam_total))
    assert out.chosen_count == brute_force_bler(3000.0, jam_total, 20)


def test_bler_single_packet_regime():
    out = optimize_bler(bler_knowledge(610.0))
    assert out.chosen_count == 1
    values = [v for _, v in out.objective_curve]
    # BLER(P_J) is near 1 while F * BLER(P_J / F) stays below 1
    assert values[0] > 0.9 and values[-1] < 1


def test_bler_curve_consistent():
    out = optimize_bler(bler_knowledge(1500.0))
    values = [v for _, v in out.objective_curve]
    assert out.chosen_count == values.index(max(values)) + 1
