import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bermcorr.errors import DomainError, InputFormatError
from bermcorr.market import DiscountCurve, SwapSpec, annuity, discount_factor, midcurve_decomposition, par_rate

FLAT2 = DiscountCurve.flat(0.02)


def test_discount_factor_flat():
    assert discount_factor(FLAT2, 0.0) == 1.0
    assert discount_factor(FLAT2, 1.0) == pytest.approx(math.exp(-0.02), abs=1e-15)


def test_discount_factor_log_linear_between_pillars():
    curve = DiscountCurve(((1.0, 0.02), (2.0, 0.03)))
    # log df is -0.02 at 1 and -0.06 at 2, so -0.04 halfway
    assert curve(1.5) == pytest.approx(0.9607894391523232, abs=1e-15)


def test_discount_factor_flat_zero_extrapolation():
    curve = DiscountCurve(((1.0, 0.02), (2.0, 0.03)))
    assert curve(0.5) == pytest.approx(math.exp(-0.02 * 0.5), abs=1e-15)
    assert curve(4.0) == pytest.approx(math.exp(-0.03 * 4.0), abs=1e-15)


def test_discount_factor_rejects_negative_time():
    with pytest.raises(DomainError):
        FLAT2(-0.1)


def test_annuity_examples():
    assert annuity(DiscountCurve.flat(0.0), SwapSpec(1, 2)) == 1.0
    assert annuity(FLAT2, SwapSpec(0, 2)) == pytest.approx(math.exp(-0.02) + math.exp(-0.04), abs=1e-15)


def test_par_rate_examples():
    assert par_rate(DiscountCurve.flat(0.0), SwapSpec(1, 5)) == 0.0
    expected = (1 - math.exp(-0.02)) / math.exp(-0.02)
    assert par_rate(FLAT2, SwapSpec(0, 1)) == pytest.approx(expected, abs=1e-15)


def test_semiannual_schedule():
    spec = SwapSpec(1.0, 3.0, 2)
    assert spec.n_periods == 4
    np.testing.assert_allclose(spec.payment_times(), [1.5, 2.0, 2.5, 3.0])
    with pytest.raises(DomainError):
        SwapSpec(1.0, 2.25, 2)


@pytest.mark.parametrize("bad", [dict(start=2, end=1), dict(start=-1, end=1), dict(start=0, end=1, fixed_frequency=0)])
def test_swap_spec_validation(bad):
    with pytest.raises(DomainError):
        SwapSpec(**bad)


def test_curve_validation():
    with pytest.raises(DomainError):
        DiscountCurve(())
    with pytest.raises(DomainError):
        DiscountCurve(((2.0, 0.01), (1.0, 0.02)))


curves = st.lists(st.floats(-0.01, 0.08), min_size=4, max_size=4).map(
    lambda zs: DiscountCurve(tuple(zip((1.0, 2.0, 5.0, 10.0), zs)))
)


@given(curves, st.integers(0, 4), st.integers(1, 4), st.integers(1, 4))
def test_annuity_additive_and_rate_telescoping(curve, s, m, e):
    start, mid, end = s, s + m, s + m + e
    a_all, a1, a2 = (annuity(curve, SwapSpec(*p)) for p in ((start, end), (start, mid), (mid, end)))
    assert a_all == pytest.approx(a1 + a2, rel=1e-13)
    r_all, r1, r2 = (par_rate(curve, SwapSpec(*p)) for p in ((start, end), (start, mid), (mid, end)))
    assert a_all * r_all == pytest.approx(a1 * r1 + a2 * r2, abs=1e-14)


@given(curves, st.integers(1, 4), st.integers(0, 3), st.integers(1, 5))
def test_midcurve_decomposition_is_identity(curve, expiry, gap, tenor):
    spec = SwapSpec(expiry + gap, expiry + gap + tenor)
    assert midcurve_decomposition(curve, expiry, spec) == pytest.approx(par_rate(curve, spec), abs=1e-14)


def test_market_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"pillars": [[1, 0.02], [5, 0.03]]}))
    assert DiscountCurve.from_json(p).pillars == ((1.0, 0.02), (5.0, 0.03))
    p.write_text('{"pillars": [[1, 0.02],\n [5 0.03]]}')
    with pytest.raises(InputFormatError, match=r":2:"):
        DiscountCurve.from_json(p)
    p.write_text('{"curve": []}')
    with pytest.raises(InputFormatError):
        DiscountCurve.from_json(p)
