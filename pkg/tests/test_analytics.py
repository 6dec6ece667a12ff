import math

import mpmath

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bermcorr.analytics import (
    NormalLaw,
    QuadratureGrid,
    bachelier,
    bisect_crossing,
    clark_max,
    clark_max_moments,
    clark_running_corr,
    gaussian_expectation,
    gaussian_expectation_2d,
    simpson_1d,
    simpson_2d,
    validate_correlation_matrix,
)
from bermcorr.errors import DomainError
from bermcorr.oracle import McSpec, mc_max_gaussian

PHI0 = 0.3989422804014327

rates = st.floats(-0.05, 0.1)
vols = st.floats(1e-5, 0.05)


# -- Bachelier ----------------------------------------------------------------

def test_bachelier_examples():
    assert bachelier(0.02, 0.01, 0.0, 1) == 0.01
    for omega in (1, -1):
        assert bachelier(0.0, 0.0, 0.01, omega) == pytest.approx(0.01 * PHI0, abs=1e-16)


def test_bachelier_rejects_bad_inputs():
    with pytest.raises(DomainError):
        bachelier(0.0, 0.0, -0.01)
    with pytest.raises(DomainError):
        bachelier(0.0, 0.0, 0.01, 0)


def test_bachelier_matches_mpmath_integral():
    mpmath.mp.dps = 30
    m, sd = 0.031, 0.012
    for k in (0.0, 0.02, 0.031, 0.05):
        for omega in (1, -1):
            f = lambda x: max(omega * (x - k), 0) * mpmath.npdf(x, m, sd)
            exact = mpmath.quad(f, [m - 20 * sd, k, m + 20 * sd])
            assert bachelier(m, k, sd, omega) == pytest.approx(float(exact), rel=1e-13, abs=1e-17)


def test_gaussian_expectation_kinked_payoff():
    law = NormalLaw(0.031, 0.012)
    num = gaussian_expectation(lambda x: np.maximum(x - 0.02, 0.0), law, breaks=(0.02,))
    assert num == pytest.approx(bachelier(0.031, 0.02, 0.012), rel=1e-8)


@given(rates, rates, vols)
def test_bachelier_parity_and_bounds(f, k, s):
    call, put = bachelier(f, k, s, 1), bachelier(f, k, s, -1)
    assert call - put == pytest.approx(f - k, abs=1e-14)
    assert call >= max(f - k, 0.0) - 1e-16
    assert call <= max(f - k, 0.0) + s * PHI0 + 1e-16


@given(rates, rates, vols, st.floats(1.0, 3.0))
def test_bachelier_monotone_in_vol(f, k, s, mult):
    for omega in (1, -1):
        assert bachelier(f, k, s * mult, omega) >= bachelier(f, k, s, omega)


def test_bachelier_broadcasts():
    out = bachelier(np.array([0.01, 0.02]), 0.015, np.array([0.0, 0.01]))
    assert out.shape == (2,)
    assert out[0] == 0.0


# -- Simpson ------------------------------------------------------------------

def test_simpson_exact_for_cubics():
    g = QuadratureGrid(0.0, 1.0, 3)
    assert simpson_1d(lambda x: np.ones_like(x), g) == pytest.approx(1.0, abs=1e-15)
    assert simpson_1d(lambda x: x**3, g) == 0.25
    assert simpson_1d(lambda x: x**2 - x + 1, QuadratureGrid(-1.0, 2.0, 5)) == pytest.approx(4.5, abs=1e-15)


def test_simpson_2d_normalises_bivariate_density():
    g = QuadratureGrid(-8.0, 8.0, 201)
    pdf = lambda x, y: np.exp(-0.5 * (x * x + y * y)) / (2 * math.pi)
    assert simpson_2d(pdf, g, g) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("points", [2, 4, 1])
def test_grid_needs_odd_points(points):
    with pytest.raises(DomainError):
        QuadratureGrid(0.0, 1.0, points)


def test_gaussian_expectation_2d_moments():
    lx, ly = NormalLaw(0.5, 1.2), NormalLaw(-0.3, 0.7)
    rho = 0.6
    # the default +-6 sd window drops ~1e-7 of the covariance; widen it to test the rule itself
    cov = gaussian_expectation_2d(lambda x, y: (x - lx.mean) * (y - ly.mean), lx, ly, rho, width=10.0)
    assert cov == pytest.approx(rho * lx.stdev * ly.stdev, abs=1e-10)
    # degenerate correlation collapses the inner integral
    e = gaussian_expectation_2d(lambda x, y: np.maximum(x - y, 0.0), lx, ly, 1.0, width=10.0,
                                x_breaks=((lx.mean * ly.stdev - ly.mean * lx.stdev) / (ly.stdev - lx.stdev),))
    assert e == pytest.approx(bachelier(lx.mean - ly.mean, 0.0, lx.stdev - ly.stdev), rel=1e-7)


def test_gaussian_expectation_2d_kinked_payoff_with_break():
    lx, ly = NormalLaw(0.02, 0.01), NormalLaw(0.01, 0.008)
    rho, k = 0.3, 0.004
    spread_sd = math.sqrt(lx.stdev**2 + ly.stdev**2 - 2 * rho * lx.stdev * ly.stdev)
    val = gaussian_expectation_2d(
        lambda x, y: np.maximum(x - y - k, 0.0), lx, ly, rho,
        width=10.0, y_break=lambda x, lo, hi: x - k,
    )
    assert val == pytest.approx(bachelier(lx.mean - ly.mean, k, spread_sd), rel=1e-8)


def test_bisect_crossing():
    roots = bisect_crossing(lambda y: y**2 - np.array([2.0, 3.0, -1.0]), [0.0, 0.0, 0.0], [2.0, 2.0, 2.0])
    assert roots[0] == pytest.approx(math.sqrt(2.0), abs=1e-14)
    assert roots[1] == pytest.approx(math.sqrt(3.0), abs=1e-14)
    assert np.isnan(roots[2])


# -- Clark ----------------------------------------------------------------------

def test_clark_examples():
    z = NormalLaw(0.0, 1.0)
    mean, _ = clark_max_moments(z, z, 0.0)
    assert mean == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-15)
    a = NormalLaw(0.3, 0.8)
    assert clark_max_moments(a, a, 1.0) == (0.3, 0.8)
    mean, _ = clark_max_moments(a, NormalLaw(0.0, 0.0), 0.0)
    assert mean == pytest.approx(bachelier(0.3, 0.0, 0.8), abs=1e-15)


def test_clark_running_corr_examples():
    z = NormalLaw(0.0, 1.0)
    m = clark_max_moments(z, z, 0.0)
    assert clark_running_corr(z, z, 0.0, 0.0, 0.0, m) == 0.0
    dominant = NormalLaw(50.0, 1.0)
    point = NormalLaw(0.0, 0.0)
    m = clark_max_moments(dominant, point, 0.0)
    assert clark_running_corr(dominant, point, 0.0, 0.4, 0.0, m) == pytest.approx(0.4, abs=1e-12)
    # corr(max(A, B), C) for iid A, B and corr 0.5 to C; 1e7-path MC gives 0.605586 +- 0.0002
    m = clark_max_moments(z, z, 0.0)
    assert clark_running_corr(z, z, 0.0, 0.5, 0.5, m) == pytest.approx(0.605586, abs=3 * 0.0002)


normals = st.builds(NormalLaw, st.floats(-2, 2), st.floats(0.0, 2.0))


@given(normals, normals, st.floats(-1.0, 1.0))
def test_clark_max_moments_properties(a, b, rho):
    m, s = clark_max_moments(a, b, rho)
    assert m >= max(a.mean, b.mean) - 1e-12
    # symmetric in its arguments
    m2, s2 = clark_max_moments(b, a, rho)
    assert m == pytest.approx(m2, abs=1e-12)
    assert s == pytest.approx(s2, abs=1e-9)
    # translation equivariance
    shift = 0.7
    m3, s3 = clark_max_moments(NormalLaw(a.mean + shift, a.stdev), NormalLaw(b.mean + shift, b.stdev), rho)
    assert m3 == pytest.approx(m + shift, abs=1e-12)
    assert s3 == pytest.approx(s, abs=1e-9)


def test_clark_max_single_and_order_validation():
    law = clark_max([0.2], [0.5], [[1.0]])
    assert (law.mean, law.stdev) == (0.2, 0.5)
    with pytest.raises(DomainError):
        clark_max([0.0, 0.0], [1.0, 1.0], np.eye(2), order=[0, 0])


def test_clark_max_comonotone_collapse():
    corr = np.ones((3, 3))
    law = clark_max([0.0, 0.0, 0.0], [0.01, 0.01, 0.01], corr)
    assert law.mean == 0.0 and law.stdev == 0.01


@pytest.mark.slow
def test_clark_max_three_with_floor_vs_mc():
    means = np.array([0.002, -0.001, 0.0005])
    stdevs = np.array([0.010, 0.011, 0.009])
    corr = np.array([[1.0, 0.95, 0.9], [0.95, 1.0, 0.93], [0.9, 0.93, 1.0]])
    full = np.eye(4)
    full[:3, :3] = corr
    approx = clark_max(np.append(means, 0.0), np.append(stdevs, 0.0), full, order=[0, 2, 1, 3]).mean
    mc = mc_max_gaussian(means, stdevs, corr, McSpec(2_000_000, seed=7))
    assert abs(approx / mc.estimate - 1.0) < 0.01


# -- correlation validation ----------------------------------------------------

def test_validate_unchanged_cases():
    for m in (np.eye(3), np.ones((3, 3))):
        out, rep = validate_correlation_matrix(m)
        assert not rep.repaired
        np.testing.assert_array_equal(out, m)


def test_validate_repairs_infeasible_matrix():
    m = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, -0.9], [0.9, -0.9, 1.0]])
    assert np.linalg.eigvalsh(m)[0] < 0.0  # independent check the input is not PSD
    out, rep = validate_correlation_matrix(m)
    assert rep.repaired and rep.min_eigenvalue < 0
    assert np.linalg.eigvalsh(out)[0] > -1e-12
    np.testing.assert_allclose(np.diag(out), 1.0)
    assert rep.frobenius_distance == pytest.approx(np.linalg.norm(out - m))


@pytest.mark.parametrize("m", [
    [[1.0, 0.5], [0.4, 1.0]],
    [[1.0, 1.5], [1.5, 1.0]],
    [[0.9, 0.0], [0.0, 1.0]],
    [1.0, 0.5],
])
def test_validate_rejects_malformed(m):
    with pytest.raises(DomainError):
        validate_correlation_matrix(m)


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_repaired_matrices_are_valid(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, (4, 4))
    m = np.clip((a + a.T) / 2, -1, 1)
    np.fill_diagonal(m, 1.0)
    out, rep = validate_correlation_matrix(m)
    assume(rep.repaired)
    assert np.linalg.eigvalsh(out)[0] > -1e-10
    np.testing.assert_allclose(out, out.T)
    np.testing.assert_allclose(np.diag(out), 1.0)
