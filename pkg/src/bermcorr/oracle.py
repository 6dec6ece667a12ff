"""Monte Carlo oracles for the semi-analytical pricers.

Paths are generated in fixed-size blocks. Block ``b`` draws from its own
Philox stream seeded with ``(seed, b)``, and block statistics are merged in
block order, so an estimate depends only on ``(paths, seed, antithetic)``
and not on how many threads produced it. Normals come from the inverse cdf
of 53-bit uniforms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from scipy.special import ndtri

from .analytics import bachelier, validate_correlation_matrix
from .bermudan import REPAIR_FAIL, BermudanSwaption, _check_trade, _resolve_corr, _step_data
from .canary import CanaryInputs, CanarySwaption, rho_x1_z
from .coterminal import CoterminalSet
from .errors import DomainError, ModelError
from .midcurve import MidcurveInputs, MidcurveSwaption
from .relstrike import FixingVols, RelativeStrikeSwaption

DEFAULT_BLOCK = 1 << 16
_U53 = float(1 << 53)


@dataclass(frozen=True)
class McSpec:
    """Path count, seed and antithetic flag; ``workers`` only affects speed."""

    paths: int
    seed: int = 0
    antithetic: bool = True
    block_size: int = DEFAULT_BLOCK
    workers: int = 1

    def __post_init__(self):
        if self.paths < 2:
            raise DomainError(f"need at least 2 paths, got {self.paths}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.block_size < 2 or self.block_size % 2:
            raise DomainError("block_size must be even and >= 2")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")

    def blocks(self):
        """``(index, draws)`` per block; with antithetics a draw is one pair of paths."""
        per_block = self.block_size // 2 if self.antithetic else self.block_size
        total = self.paths // 2 if self.antithetic else self.paths
        full, rest = divmod(total, per_block)
        sizes = [per_block] * full + ([rest] if rest else [])
        return list(enumerate(sizes))


@dataclass(frozen=True)
class McResult:
    estimate: float
    std_error: float
    paths_used: int

    def within(self, value, n_se=3.0) -> bool:
        return abs(value - self.estimate) <= n_se * self.std_error


def standard_normals(spec: McSpec, block: int, draws: int, dim: int) -> np.ndarray:
    """``(draws, dim)`` standard normals of one block, reproducible from ``(seed, block)``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, block])))
    bits = rng.integers(0, 1 << 53, size=(draws, dim), dtype=np.int64)
    return ndtri((bits + 0.5) / _U53)


def _block_stats(values):
    n = values.size
    mean = float(np.mean(values))
    m2 = float(np.sum((values - mean) ** 2))
    return n, mean, m2


def _merge(stats):
    # pairwise update, applied in block order
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        if nb == 0:
            continue
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def run_mc(payoff, dim: int, spec: McSpec) -> McResult:
    """Mean of ``payoff(z)`` over standard normal rows ``z`` of width ``dim``."""

    def one(block):
        b, draws = block
        z = standard_normals(spec, b, draws, dim)
        values = payoff(z)
        if spec.antithetic:
            values = 0.5 * (values + payoff(-z))
        return _block_stats(np.asarray(values, dtype=float))

    blocks = spec.blocks()
    if spec.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            stats = list(pool.map(one, blocks))
    else:
        stats = [one(b) for b in blocks]
    n, mean, m2 = _merge(stats)
    var = m2 / (n - 1) if n > 1 else 0.0
    used = 2 * n if spec.antithetic else n
    return McResult(mean, math.sqrt(max(var, 0.0) / n), used)


def correlation_factor(corr) -> np.ndarray:
    """Lower factor ``L`` with ``L L^T = corr`` after PSD validation.

    Plain Cholesky first; a pivoted Cholesky handles singular matrices.
    """
    matrix, report = validate_correlation_matrix(corr)
    if report.frobenius_distance > REPAIR_FAIL:
        raise ModelError(
            f"correlation matrix too far from PSD (repair distance {report.frobenius_distance:.3g})"
        )
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    c, piv, rank, info = lapack.dpstrf(matrix, lower=1, tol=1e-12)
    if info < 0:
        raise ModelError("pivoted Cholesky failed")
    low = np.tril(c)
    low[:, rank:] = 0.0
    factor = np.empty_like(low)
    factor[piv - 1] = low
    return factor


def _affine(means, stdevs, corr):
    means = np.asarray(means, dtype=float)
    stdevs = np.asarray(stdevs, dtype=float)
    factor = correlation_factor(corr) * stdevs[:, None]
    return lambda z: means + z @ factor.T


def sample_joint_gaussian(means, stdevs, corr, spec: McSpec) -> np.ndarray:
    """All sample rows in block order; with antithetics each block is ``[z; -z]``."""
    to_x = _affine(means, stdevs, corr)
    dim = len(means)
    rows = []
    for b, draws in spec.blocks():
        z = standard_normals(spec, b, draws, dim)
        rows.append(to_x(z))
        if spec.antithetic:
            rows.append(to_x(-z))
    return np.concatenate(rows, axis=0)


def _bivariate(mu_x, sd_x, mu_y, sd_y, rho):
    corr = np.array([[1.0, rho], [rho, 1.0]])
    return _affine([mu_x, mu_y], [sd_x, sd_y], corr)


# ---------------------------------------------------------------------------
# product oracles


def mc_max_gaussian(means, stdevs, corr, spec: McSpec, floor=True) -> McResult:
    """``E[max(0, V_1, ..., V_n)]`` (or without the zero floor) for a Gaussian vector."""
    to_x = _affine(means, stdevs, corr)

    def payoff(z):
        v = np.max(to_x(z), axis=1)
        return np.maximum(v, 0.0) if floor else v

    return run_mc(payoff, len(means), spec)


def mc_price_canary(
    trade: CanarySwaption,
    inputs: CanaryInputs,
    annuity_2: float,
    spec: McSpec,
    rho_x1z=None,
) -> McResult:
    """Simulates ``(X_1, Z)`` and applies the closed-form option on the second coterminal."""
    if rho_x1z is None:
        rho_x1z = rho_x1_z(inputs, *inputs.annuities(annuity_2))
    K, omega, s = trade.strike, trade.omega, inputs.forward_vol
    to_x = _bivariate(
        inputs.mu1 + inputs.sigma_1e**2 * inputs.delta1, inputs.sigma_1e,
        inputs.mu2 + inputs.sigma_x2**2 * inputs.delta2, inputs.sigma_z, rho_x1z,
    )

    def payoff(z):
        xz = to_x(z)
        now = inputs.w1 * np.maximum(omega * (xz[:, 0] - K), 0.0)
        return np.maximum(now, bachelier(xz[:, 1], K, s, omega))

    return _scaled(run_mc(payoff, 2, spec), annuity_2)


def mc_price_bermudan_mm_law(
    trade: BermudanSwaption,
    cset: CoterminalSet,
    spec: McSpec,
    corr=None,
    mode: str = "perfect",
) -> McResult:
    """``A_n E[max(0, V_1, ..., V_n)]`` sampled on the moment-matching pricer's joint law."""
    _check_trade(trade, cset)
    matrix = _resolve_corr(cset, corr, mode, False)
    w = cset.weights
    means = w * trade.omega * (cset.shifted_forwards - trade.strike)
    return _scaled(mc_max_gaussian(means, w * cset.sigmas, matrix, spec), cset.annuities[-1])


def mc_nested_lattice_check(trade: BermudanSwaption, cset: CoterminalSet, spec: McSpec) -> McResult:
    """Two-exercise lattice value: draws ``(X_1, Z_2)``, integrates the last step in closed form."""
    _check_trade(trade, cset)
    if cset.n != 2:
        raise DomainError(f"the nested check needs exactly two exercises, got {cset.n}")
    st = _step_data(cset, 1)
    mu = cset.shifted_forwards
    K, omega, w1 = trade.strike, trade.omega, cset.weights[0]
    to_x = _bivariate(mu[0], cset.sigmas[0], mu[1], st.sigma_z, st.rho)

    def payoff(z):
        xz = to_x(z)
        now = w1 * np.maximum(omega * (xz[:, 0] - K), 0.0)
        return np.maximum(now, bachelier(xz[:, 1], K, st.forward_vol, omega))

    return _scaled(run_mc(payoff, 2, spec), cset.annuities[-1])


def mc_price_relative_strike(
    trade: RelativeStrikeSwaption,
    annuity_value: float,
    vols: FixingVols,
    spec: McSpec,
) -> McResult:
    """Draws the rate at its start and at the fixing date; pays ``(omega (x - z - K))^+``."""
    rho = vols.sigma_z / vols.sigma_x if vols.sigma_x > 0.0 else 0.0
    to_x = _bivariate(0.0, vols.sigma_x, 0.0, vols.sigma_z, rho)
    mult, K, omega = trade.vol_spread_mult, trade.spread, trade.omega

    def payoff(z):
        xz = to_x(z)
        return np.maximum(omega * (mult * (xz[:, 0] - xz[:, 1]) - K), 0.0)

    return _scaled(run_mc(payoff, 2, spec), annuity_value)


def mc_fixing_correlation(vol_fix, t_fix, vol_start, t_start, spec: McSpec) -> McResult:
    """Empirical ``corr(R(T_s), R(T_fix))`` for a Gaussian martingale rate.

    The rate diffuses with per-annum vol ``vol_fix`` up to ``T_fix`` and then
    with the vol that makes its total variance to ``T_s`` equal to
    ``vol_start^2 T_s``. The standard error is the large-sample
    ``(1 - r^2) / sqrt(n)`` over independent draws; antithetic pairs count
    once and the known zero means are imposed.
    """
    if not 0.0 < t_fix < t_start:
        raise DomainError("need 0 < t_fix < t_start")
    var_z = vol_fix**2 * t_fix
    rest = vol_start**2 * t_start - var_z
    if rest < 0.0:
        raise ModelError("negative forward variance")
    sd_z, sd_rest = math.sqrt(var_z), math.sqrt(rest)
    sums = np.zeros(5)
    draws_total = 0
    for b, draws in spec.blocks():
        z = standard_normals(spec, b, draws, 2)
        draws_total += draws
        # antithetic copies leave every second moment unchanged and the means at zero
        z_fix = sd_z * z[:, 0]
        x = z_fix + sd_rest * z[:, 1]
        if spec.antithetic:
            sums += [0.0, 0.0, x @ x, z_fix @ z_fix, x @ z_fix]
        else:
            sums += [x.sum(), z_fix.sum(), x @ x, z_fix @ z_fix, x @ z_fix]
    n = draws_total
    mx, mz = sums[0] / n, sums[1] / n
    cov = sums[4] / n - mx * mz
    r = float(cov / math.sqrt((sums[2] / n - mx * mx) * (sums[3] / n - mz * mz)))
    used = 2 * n if spec.antithetic else n
    return McResult(r, (1.0 - r * r) / math.sqrt(n), used)


def mc_price_midcurve(trade: MidcurveSwaption, inputs: MidcurveInputs, spec: McSpec) -> McResult:
    a, b = inputs.weights.a, inputs.weights.b
    lx, ly = inputs.law_long, inputs.law_short
    to_x = _bivariate(lx.mean, lx.stdev, ly.mean, ly.stdev, inputs.rho)
    K, omega = trade.strike, trade.omega

    def payoff(z):
        xy = to_x(z)
        return np.maximum(omega * (a * xy[:, 0] - b * xy[:, 1] - K), 0.0)

    return _scaled(run_mc(payoff, 2, spec), inputs.annuity)


def _scaled(res: McResult, annuity_value: float) -> McResult:
    return McResult(res.estimate * annuity_value, res.std_error * annuity_value, res.paths_used)
