import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bermcorr.analytics import bachelier
from bermcorr.canary import CanaryInputs, CanarySwaption, price_canary_integral, price_canary_mm, rho_x1_z
from bermcorr.coterminal import z_correlation
from bermcorr.errors import DomainError, ModelError
from bermcorr.oracle import McSpec, mc_max_gaussian, mc_price_canary

A2 = 2.0


def inputs(**kw):
    base = dict(mu1=0.032, mu2=0.034, sigma_1e=0.010, sigma_x2=0.012, sigma_z=0.010,
                sigma_12=0.009, rho_2e=0.89, w1=2.0)
    base.update(kw)
    return CanaryInputs(**base)


def test_rho_x1_z_example():
    # 1e7-path MC of Z = (A_1e X_1 - A_12 Y) / A_2e gives 0.946169 +- 3.3e-5
    r = rho_x1_z(inputs(), 4.0, 2.0, 2.0)
    assert r == pytest.approx(0.9461, abs=1e-4)
    assert abs(r - 0.946169) < 3 * 3.3e-5


def test_rho_x1_z_without_short_vol_is_one():
    assert rho_x1_z(inputs(sigma_12=0.0), 4.0, 2.0) == 1.0


def test_zero_vols_deterministic_limit():
    inp = inputs(sigma_1e=0.0, sigma_x2=0.0, sigma_z=0.0)
    for k, omega in ((0.03, 1), (0.033, 1), (0.036, -1)):
        t = CanarySwaption(1, 2, 10, k, omega)
        expected = A2 * max(2.0 * max(omega * (0.032 - k), 0.0), max(omega * (0.034 - k), 0.0))
        assert price_canary_integral(t, inp, A2).pv == pytest.approx(expected, abs=1e-15)
        assert price_canary_mm(t, inp, A2).pv == pytest.approx(expected, abs=1e-15)


def test_worthless_first_exercise_is_second_european():
    inp = inputs(sigma_1e=0.0)
    t = CanarySwaption(1, 2, 10, 0.01, -1)
    expected = A2 * bachelier(0.034, 0.01, 0.012, -1)
    assert price_canary_integral(t, inp, A2, rho_x1z=0.0).pv == pytest.approx(expected, rel=1e-6)


def test_mm_dominated_member_collapses_to_european():
    inp = inputs(mu1=0.032 + 10 * 0.010 * 2)
    t = CanarySwaption(1, 2, 10, 0.032, 1)
    expected = A2 * 2.0 * bachelier(inp.mu1, 0.032, 0.010, 1)
    assert price_canary_mm(t, inp, A2).pv == pytest.approx(expected, rel=1e-9)


def test_integral_vs_mc():
    inp = inputs()
    for k in (0.025, 0.033, 0.045):
        t = CanarySwaption(1, 2, 10, k, 1)
        mc = mc_price_canary(t, inp, A2, McSpec(1_000_000, seed=21))
        assert mc.within(price_canary_integral(t, inp, A2).pv)


def _mm_law_mc(inp, k, omega, rho, seed):
    means = [inp.w1 * omega * (inp.mu1 - k), omega * (inp.mu2 - k)]
    stdevs = [inp.w1 * inp.sigma_1e, inp.sigma_x2]
    return mc_max_gaussian(means, stdevs, [[1, rho], [rho, 1]], McSpec(2_000_000, seed=seed))


def test_mm_exact_when_floor_is_remote():
    # both exercise values far in the money: the pairwise step is exact
    inp = inputs(mu2=0.164)
    t = CanarySwaption(1, 2, 10, -0.1, 1)
    res = price_canary_mm(t, inp, A2)
    mc = _mm_law_mc(inp, -0.1, 1, res.diagnostics["rho"], 22)
    assert mc.within(res.pv_per_annuity)


def test_mm_floor_fold_error_is_moderate_at_the_money():
    # folding the zero floor into a Gaussian is the only approximation left;
    # near the money it costs a few percent
    inp = inputs()
    for omega in (1, -1):
        t = CanarySwaption(1, 2, 10, 0.033, omega)
        res = price_canary_mm(t, inp, A2)
        mc = _mm_law_mc(inp, 0.033, omega, res.diagnostics["rho"], 24)
        assert abs(res.pv_per_annuity / mc.estimate - 1.0) < 0.05


def test_mm_reports_the_second_vol_choice():
    res = price_canary_mm(CanarySwaption(1, 2, 10, 0.033), inputs(), A2)
    assert res.diagnostics["sigma_second"] == 0.012
    assert res.diagnostics["sigma_12"] == 0.009
    assert res.diagnostics["order"][-1] == 2


def test_zero_forward_vol_integral_is_exact_max():
    # the continuation becomes the intrinsic value of the second coterminal
    inp = inputs(sigma_z=0.012)
    t = CanarySwaption(1, 2, 10, 0.033, 1)
    rho = rho_x1_z(inp, *inp.annuities(A2))
    res = price_canary_integral(t, inp, A2)
    means = [inp.w1 * (inp.mu1 - 0.033), inp.mu2 - 0.033]
    stdevs = [inp.w1 * inp.sigma_1e, inp.sigma_z]
    mc = mc_max_gaussian(means, stdevs, [[1, rho], [rho, 1]], McSpec(2_000_000, seed=23))
    assert mc.within(res.pv_per_annuity)


def test_input_validation():
    with pytest.raises(ModelError, match="negative forward variance"):
        inputs(sigma_z=0.02)
    with pytest.raises(DomainError):
        inputs(w1=0.0)
    with pytest.raises(DomainError):
        inputs(rho_2e=1.5)
    with pytest.raises(DomainError):
        CanarySwaption(2, 1, 10, 0.03)
    with pytest.raises(DomainError):
        inputs(w1=0.9).annuities(A2)


def test_from_coterminal(sample_market):
    from bermcorr.coterminal import CoterminalSet

    m = sample_market
    cs = CoterminalSet.from_market([2, 3], 10, 0.04, m.curve, m.surface, m.corr)
    inp, a2 = CanaryInputs.from_coterminal(cs)
    assert a2 == cs.annuities[1]
    assert inp.w1 == pytest.approx(cs.annuities[0] / cs.annuities[1])
    assert inp.sigma_z == pytest.approx(cs.sigma_z(0, 1))
    assert inp.rho_2e == m.corr.long_short_corr(2, 3)
    r = rho_x1_z(inp, *inp.annuities(a2))
    assert r == pytest.approx(z_correlation(cs.annuities[0], cs.bridge(0, 1).annuity, inp.sigma_1e, inp.sigma_12, inp.rho_2e))
    with pytest.raises(DomainError):
        CanaryInputs.from_coterminal(CoterminalSet.from_market([2], 10, 0.04, m.curve, m.surface, m.corr))


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.02, 0.03), st.sampled_from([1, -1]), st.floats(0.003, 0.02), st.floats(0.1, 1.0), st.floats(0.5, 0.99))
def test_integral_bounds(offset, omega, s1, zfrac, rho):
    inp = inputs(sigma_1e=s1, sigma_z=0.012 * zfrac, rho_2e=rho)
    k = 0.033 + offset
    t = CanarySwaption(1, 2, 10, k, omega)
    v = price_canary_integral(t, inp, A2).pv_per_annuity
    e1 = inp.w1 * bachelier(inp.mu1, k, s1, omega)
    e2 = bachelier(inp.mu2, k, inp.sigma_x2, omega)
    assert v >= max(e1, e2) - 1e-6
    assert v <= e1 + e2 + 1e-6
