import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from jamguard.airlink import (
    ChannelModel,
    Granularity,
    LinkSetup,
    PowerProfile,
    SlotConfig,
    draw_slots,
    overlap_counts,
)
from jamguard.analytic import (
    GaussianJamSpec,
    conditional_md_cdf,
    overlap_bounds,
    overlap_pmf,
    overlap_pmf_per_symbol,
    pmd_gaussian_jammer,
    pmd_known_jam,
)
from jamguard.detector import binomial_stderr, calibrate, simulate_statistics
from jamguard.errors import ParameterError

FULL_GRID = SlotConfig()


def test_overlap_bounds():
    assert overlap_bounds(25, 5, 21) == (1, 5)
    assert overlap_bounds(25, 5, 5) == (0, 5)
    assert overlap_bounds(12, 3, 4, symbols=2) == (0, 6)
    assert overlap_bounds(12, 5, 10, symbols=3) == (9, 15)
    with pytest.raises(ParameterError):
        overlap_bounds(5, 6, 1)


def test_overlap_no_overlap_probability():
    law = overlap_pmf(FULL_GRID, 5, 5)
    expected = math.comb(20, 5) / math.comb(25, 5)
    assert law.pmf[0] == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.2918, abs=1e-4)
    assert law.support[1] == 168


def test_overlap_full_scale_sums_to_one():
    law = overlap_pmf(FULL_GRID, 5, 21)
    assert law.e_min == 168 and law.e_max == 840
    assert abs(float(np.sum(law.pmf)) - 1.0) <= 1e-12
    assert law.mean() == pytest.approx(5 * 21 / 25 * 168, rel=1e-12)


def test_overlap_without_jamming():
    law = overlap_pmf(FULL_GRID, 5, 0)
    assert list(law.support) == [0]
    assert law.pmf[0] == 1.0


def test_overlap_exact_fractions():
    law = overlap_pmf(SlotConfig(8, 1, 1), 3, 4, exact=True)
    assert sum(law.pmf) == Fraction(1)
    assert law.pmf[0] == Fraction(math.comb(4, 3), math.comb(8, 3))


def test_overlap_re_grid_law():
    slot = SlotConfig(12, 1, 2, granularity=Granularity.RE)
    law = overlap_pmf(slot, 3, 4)
    expected = stats.hypergeom(24, 8, 6).pmf(law.support)
    np.testing.assert_allclose(law.pmf, expected, rtol=1e-12)


def test_per_symbol_law_equals_grid_law_for_one_symbol():
    slot = SlotConfig(24, 1, 1, granularity=Granularity.RE)
    a = overlap_pmf(slot, 6, 18)
    b = overlap_pmf_per_symbol(slot, 6, 18)
    np.testing.assert_array_equal(a.support, b.support)
    np.testing.assert_allclose(a.pmf, b.pmf, rtol=1e-12)


def test_per_symbol_redraws_follow_convolution(rng):
    slot = SlotConfig(12, 1, 4, granularity=Granularity.RE)
    setup = LinkSetup(slot, ChannelModel.awgn(), PowerProfile(10.0, 10.0), 3, 4)
    n = 200_000
    e = overlap_counts(setup, draw_slots(setup, rng, 1, 0, n))
    counts = np.bincount(e, minlength=13)
    per_symbol = overlap_pmf_per_symbol(slot, 3, 4)
    grid = overlap_pmf(slot, 3, 4)
    assert list(per_symbol.support) == list(range(13))

    def chi2_pvalue(pmf):
        keep = pmf * n >= 5  # pool the sparse tail
        obs = np.append(counts[keep], counts[~keep].sum())
        exp = np.append(pmf[keep], pmf[~keep].sum()) * n
        return stats.chisquare(obs, exp).pvalue

    assert chi2_pvalue(per_symbol.pmf) > 1e-3
    # the grid-wide law does not describe per-symbol redraws
    assert chi2_pvalue(grid.pmf) < 1e-6


def test_per_symbol_requires_re():
    with pytest.raises(ParameterError):
        overlap_pmf_per_symbol(FULL_GRID, 5, 5)


# -- known jamming vector ----------------------------------------------------------------

def test_known_jam_zero_energy():
    cal = calibrate(1e-2, 14)
    assert pmd_known_jam(cal.threshold, 0.0, 14) == pytest.approx(0.99, abs=1e-12)


def test_known_jam_strong():
    cal = calibrate(1e-2, 14)
    assert pmd_known_jam(cal.threshold, 500.0, 14) < 1e-12


def test_known_jam_monte_carlo():
    rng = np.random.default_rng(99)
    mn, n = 14, 10**6
    cal = calibrate(1e-2, mn)
    j = np.full(mn, math.sqrt(20.0 / mn) * np.exp(0.3j))
    z = (rng.standard_normal((n, mn)) + 1j * rng.standard_normal((n, mn))) / math.sqrt(2)
    lam = np.mean(np.abs(z + j) ** 2, axis=1)
    p_hat = np.mean(lam <= cal.threshold)
    p = pmd_known_jam(cal.threshold, 20.0, mn)
    assert abs(p_hat - p) <= 3 * binomial_stderr(p, n)


def test_known_jam_decreasing_in_energy():
    thr = calibrate(1e-3, 168).threshold
    vals = [pmd_known_jam(thr, e, 168) for e in np.linspace(0, 200, 41)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


# -- Gaussian jammer, conditional on the overlap ------------------------------------------

def test_conditional_md_no_overlap():
    thr = calibrate(1e-2, 6).threshold
    assert conditional_md_cdf(thr, 0, 6, 1.0, 5.0) == pytest.approx(0.99, abs=1e-12)


def test_conditional_md_full_overlap():
    thr = calibrate(1e-2, 6).threshold
    expected = stats.gamma(6, scale=(1.0 + 2.0) / 6).cdf(thr)
    assert conditional_md_cdf(thr, 6, 6, 1.0, 2.0) == pytest.approx(expected, rel=1e-10)


def test_conditional_md_monte_carlo():
    rng = np.random.default_rng(3)
    n = 10**7
    thr = calibrate(1e-2, 6).threshold
    lam = (rng.gamma(3, 3.0, n) + rng.gamma(3, 1.0, n)) / 6
    p_hat = np.mean(lam <= thr)
    p = conditional_md_cdf(thr, 3, 6, 1.0, 2.0)
    assert abs(p_hat - p) <= 3 * binomial_stderr(p, n)


def test_conditional_md_bad_overlap():
    with pytest.raises(ParameterError):
        conditional_md_cdf(1.0, 7, 6, 1.0, 1.0)


def test_gaussian_jam_spec():
    assert GaussianJamSpec(30.0, 3).per_re_var == 10.0
    with pytest.raises(ParameterError):
        GaussianJamSpec(1.0, 0)


# -- unconditional MD ------------------------------------------------------------------

def test_pmd_without_jamming():
    for pfa in (1e-6, 1e-3, 1e-1):
        assert pmd_gaussian_jammer(FULL_GRID, 5, 5, pfa, 0.0) == pytest.approx(1 - pfa, abs=1e-12)


def test_pmd_desk_scale_matches_simulation(rng):
    slot = SlotConfig(12, 1, 2)
    setup = LinkSetup(slot, ChannelModel.awgn(), PowerProfile.from_snr_db(slot, 10.0, 0.0), 3, 4)
    n = 100_000
    thr = calibrate(1e-2, setup.sample_count).threshold
    md = np.mean(simulate_statistics(setup, n, rng, blank_key=12) <= thr)
    expected = pmd_gaussian_jammer(slot, 3, 4, 1e-2, setup.power.jam_total)
    assert abs(md - expected) <= 3 * binomial_stderr(expected, n)


def test_pmd_full_scale_drops_with_pfa():
    jam = PowerProfile.from_snr_db(FULL_GRID, 10.0, 0.0).jam_total
    lo = pmd_gaussian_jammer(FULL_GRID, 5, 21, 1e-6, jam)
    hi = pmd_gaussian_jammer(FULL_GRID, 5, 21, 1e-1, jam)
    assert lo / hi >= 100


def test_pmd_monotone():
    jam = PowerProfile.from_snr_db(FULL_GRID, 10.0, 0.0).jam_total
    by_power = [pmd_gaussian_jammer(FULL_GRID, 5, 5, 1e-3, p) for p in (jam / 10, jam, 10 * jam)]
    assert by_power[0] >= by_power[1] >= by_power[2]
    by_blank = [pmd_gaussian_jammer(FULL_GRID, m, 5, 1e-3, jam) for m in (1, 3, 5, 10)]
    assert all(a >= b for a, b in zip(by_blank, by_blank[1:]))
    by_pfa = [pmd_gaussian_jammer(FULL_GRID, 5, 5, p, jam) for p in (1e-6, 1e-4, 1e-2)]
    assert all(a >= b for a, b in zip(by_pfa, by_pfa[1:]))


def test_pmd_rayleigh_energy_scales_variance():
    jam = 300.0
    a = pmd_gaussian_jammer(FULL_GRID, 5, 5, 1e-3, jam, jam_channel_energy=2.0)
    b = pmd_gaussian_jammer(FULL_GRID, 5, 5, 1e-3, 2 * jam)
    assert a == pytest.approx(b, rel=1e-12)


def test_pmd_full_jamming_floor():
    # wide-band attack at 0 dB on 840 samples: the whole overlap is hot
    jam = PowerProfile.from_snr_db(FULL_GRID, 10.0, 0.0).jam_total
    thr = calibrate(1e-3, 840).threshold
    expected = stats.gamma(840, scale=(1 + jam / 300) / 840).cdf(thr)
    assert pmd_gaussian_jammer(FULL_GRID, 5, 25, 1e-3, jam) == pytest.approx(expected, rel=1e-8, abs=1e-300)


def test_pmd_needs_blanking():
    with pytest.raises(ParameterError):
        pmd_gaussian_jammer(FULL_GRID, 0, 5, 1e-3, 300.0)
