import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bermcorr.analytics import bachelier
from bermcorr.bermudan import (
    BermudanSwaption,
    coterminal_corr,
    correlation_matrix,
    european_values,
    floor_last_order,
    general_cross_corr,
    price_bermudan_lattice,
    price_bermudan_mm,
)
from bermcorr.coterminal import Bridge, CoterminalSet, z_correlation
from bermcorr.errors import DegenerateDistributionError, DomainError, GridError, MarketDataError, ModelError
from bermcorr.oracle import McSpec, mc_nested_lattice_check, mc_price_bermudan_mm_law


def pair(sigma_z=None, rho_ls=None, rho_forward=None, sigmas=(0.010, 0.012), short=0.009):
    return CoterminalSet(
        (1.0, 2.0), 10.0, [4.0, 2.0], [0.032, 0.034], list(sigmas),
        bridges={(0, 1): Bridge(2.0, short, rho_ls, sigma_z, rho_forward)},
    )


def test_triangle_correlation_example():
    # MC of A_2e X_2 = A_1e X_1 - A_12 Y with corr(X_1, Y) = 0.936111: 0.964589 +- 2.2e-5
    r = coterminal_corr(pair(), 0, 1)
    assert r == pytest.approx(0.9646, abs=1e-4)
    assert abs(r - 0.964589) < 3 * 2.2e-5
    assert coterminal_corr(pair(), 1, 0) == r
    assert coterminal_corr(pair(), 1, 1) == 1.0


def test_triangle_degenerate_is_one():
    cs = pair(sigmas=(0.006, 0.012), short=0.0)
    assert coterminal_corr(cs, 0, 1) == 1.0


def test_literal_denominator_differs_and_clips():
    assert coterminal_corr(pair(), 0, 1, short_leg_denominator=True) == 1.0
    cs = pair(short=0.02)
    assert coterminal_corr(cs, 0, 1, short_leg_denominator=True) != coterminal_corr(cs, 0, 1)


def test_general_cross_corr_limits():
    cs = pair(sigma_z=0.012)
    assert general_cross_corr(cs, 0, 1, rho_xj=1.0) == pytest.approx(coterminal_corr(cs, 0, 1), abs=1e-15)
    assert general_cross_corr(cs, 0, 1, rho_xj=0.0) == 0.0
    cs = pair(rho_ls=0.9, sigma_z=0.010)
    expected = z_correlation(4.0, 2.0, 0.010, 0.009, 0.9) * (0.010 / 0.012)
    assert general_cross_corr(cs, 0, 1) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(DomainError):
        general_cross_corr(cs, 0, 1, rho_xj=1.5)


def test_correlation_matrix_modes():
    cs = pair(rho_ls=0.9, sigma_z=0.010)
    perfect = correlation_matrix(cs)
    assert perfect[0, 1] == pytest.approx(z_correlation(4.0, 2.0, 0.010, 0.009, 0.9))
    assert correlation_matrix(cs, "triangle")[0, 1] == coterminal_corr(cs, 0, 1)
    assert correlation_matrix(cs, "general")[0, 1] == pytest.approx(perfect[0, 1] * 0.010 / 0.012)
    with pytest.raises(DomainError):
        correlation_matrix(cs, "bogus")


def test_missing_short_vol():
    cs = pair(short=None)
    with pytest.raises(DegenerateDistributionError):
        coterminal_corr(cs, 0, 1)
    with pytest.raises(MarketDataError):
        cs.sigma_z(0, 1)


def test_floor_last_order():
    assert floor_last_order([0.1, 0.3, -0.2]) == [1, 0, 2, 3]
    assert floor_last_order([0.0, 0.0]) == [0, 1, 2]


def test_mm_single_exercise_is_bachelier():
    cs = CoterminalSet((2.0,), 10.0, [7.0], [0.03], [0.011])
    for omega in (1, -1):
        t = BermudanSwaption((2.0,), 10.0, 0.031, omega)
        assert price_bermudan_mm(t, cs).pv == pytest.approx(7.0 * bachelier(0.03, 0.031, 0.011, omega), rel=1e-14)


def test_mm_comonotone_at_the_money():
    ann = np.array([8.0, 6.0, 4.0])
    cs = CoterminalSet((1.0, 2.0, 3.0), 10.0, ann, [0.03] * 3, 0.01 * ann[-1] / ann)
    t = BermudanSwaption((1.0, 2.0, 3.0), 10.0, 0.03)
    res = price_bermudan_mm(t, cs, corr=1.0)
    assert res.pv == pytest.approx(4.0 * 0.01 / math.sqrt(2.0 * math.pi), rel=1e-12)


def test_mm_three_exercises_vs_mc(berm5_cset, sample_market):
    m = berm5_cset
    cs = CoterminalSet(m.times[:3], m.end, m.annuities[:3], m.forwards[:3], m.sigmas[:3], m.shifts[:3],
                       {k: v for k, v in m.bridges.items() if max(k) < 3})
    k = float(cs.forwards[0])
    t = BermudanSwaption(cs.times, cs.end, k)
    mm = price_bermudan_mm(t, cs).pv
    mc = mc_price_bermudan_mm_law(t, cs, McSpec(2_000_000, seed=5))
    assert abs(mm / mc.estimate - 1.0) < 0.01


def test_mm_repair_warning_and_failure():
    ann = np.array([8.0, 6.0, 4.0])
    cs = CoterminalSet((1.0, 2.0, 3.0), 10.0, ann, [0.03] * 3, [0.01] * 3)
    t = BermudanSwaption((1.0, 2.0, 3.0), 10.0, 0.03)

    def m(a):
        return np.array([[1, a, -a], [a, 1, a], [-a, a, 1]])

    res = price_bermudan_mm(t, cs, corr=m(0.55))
    assert res.diagnostics["repaired"] and res.diagnostics["warnings"]
    assert price_bermudan_mm(t, cs, corr=m(0.3)).diagnostics["warnings"] == []
    with pytest.raises(ModelError, match="repair"):
        price_bermudan_mm(t, cs, corr=m(0.9))
    with pytest.raises(DomainError):
        price_bermudan_mm(t, cs, corr=np.eye(2))


def test_lattice_single_exercise_is_bachelier():
    cs = CoterminalSet((2.0,), 10.0, [7.0], [0.03], [0.011])
    t = BermudanSwaption((2.0,), 10.0, 0.028, -1)
    assert price_bermudan_lattice(t, cs).pv == pytest.approx(7.0 * bachelier(0.03, 0.028, 0.011, -1), rel=1e-7)


def test_lattice_two_exercises_vs_nested_mc():
    cs = pair(rho_ls=0.97)
    for k in (0.028, 0.033):
        t = BermudanSwaption((1.0, 2.0), 10.0, k)
        mc = mc_nested_lattice_check(t, cs, McSpec(1_000_000, seed=8))
        assert mc.within(price_bermudan_lattice(t, cs).pv)


def test_lattice_vs_nested_mc_sample(berm5_cset):
    m = berm5_cset
    cs = CoterminalSet(m.times[:2], m.end, m.annuities[:2], m.forwards[:2], m.sigmas[:2], m.shifts[:2],
                       {(0, 1): m.bridges[(0, 1)]})
    t = BermudanSwaption(cs.times, cs.end, float(cs.forwards[0]), -1)
    mc = mc_nested_lattice_check(t, cs, McSpec(1_000_000, seed=9))
    assert mc.within(price_bermudan_lattice(t, cs).pv)


def test_lattice_bounds(berm5_cset):
    cs = berm5_cset
    t = BermudanSwaption(cs.times, cs.end, float(cs.forwards[0]))
    res = price_bermudan_lattice(t, cs)
    euro = european_values(t, cs)
    assert res.pv_per_annuity >= euro.max()
    assert res.pv_per_annuity <= euro.sum()
    assert len(res.diagnostics["steps"]) == 4


def test_lattice_errors():
    cs = pair(rho_ls=0.97)
    t = BermudanSwaption((1.0, 2.0), 10.0, 0.03)
    with pytest.raises(GridError):
        price_bermudan_lattice(t, cs, width=4.0)
    with pytest.raises(GridError):
        price_bermudan_lattice(t, cs, points=200)
    with pytest.raises(ModelError, match="negative forward variance"):
        price_bermudan_lattice(t, pair(sigma_z=0.02, rho_ls=0.9))
    with pytest.raises(DomainError):
        price_bermudan_lattice(BermudanSwaption((1.0, 3.0), 10.0, 0.03), cs)


def test_trade_validation():
    with pytest.raises(DomainError):
        BermudanSwaption((), 10.0, 0.03)
    with pytest.raises(DomainError):
        BermudanSwaption((2.0, 1.0), 10.0, 0.03)
    with pytest.raises(DomainError):
        BermudanSwaption((1.0,), 10.0, 0.03, omega=2)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.02, 0.02), st.sampled_from([1, -1]), st.floats(0.95, 0.999))
def test_lattice_dominates_europeans_and_mm_is_below_sum(offset, omega, rho_ls):
    cs = pair(rho_ls=rho_ls)
    t = BermudanSwaption((1.0, 2.0), 10.0, 0.033 + offset, omega)
    euro = european_values(t, cs)
    lat = price_bermudan_lattice(t, cs).pv_per_annuity
    mm = price_bermudan_mm(t, cs).pv_per_annuity
    assert lat >= euro.max() - 1e-7 * max(euro.max(), 1e-4)
    assert lat <= euro.sum() + 1e-9
    assert mm <= euro.sum() + 1e-9
