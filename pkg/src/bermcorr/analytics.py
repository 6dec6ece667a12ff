"""Numerical kernels shared by all pricers.

Bachelier option values, Simpson quadrature (plain, tensor and iterated over a
bivariate normal), Clark moment matching for maxima of correlated normals and
correlation-matrix validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DomainError

SQRT_2PI = math.sqrt(2.0 * math.pi)
DEFAULT_POINTS = 201
DEFAULT_WIDTH = 6.0


def norm_cdf(x):
    return ndtr(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    # x * x may overflow to inf for huge arguments; exp(-inf) = 0 is the right limit
    with np.errstate(over="ignore"):
        out = np.exp(-0.5 * x * x) / SQRT_2PI
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NormalLaw:
    """Gaussian law; ``stdev == 0`` is the point mass at ``mean``."""

    mean: float
    stdev: float

    def __post_init__(self):
        if not self.stdev >= 0.0:
            raise DomainError(f"stdev must be >= 0, got {self.stdev}")


def _check_omega(omega):
    if np.any((np.asarray(omega) != 1) & (np.asarray(omega) != -1)):
        raise DomainError(f"omega must be +1 or -1, got {omega}")


def bachelier(F, K, sigma, omega=1):
    """Undiscounted Bachelier option value per unit annuity.

    ``sigma`` is the absolute volatility including the square-root-of-time
    factor. Broadcasts over array arguments; ``sigma == 0`` gives the
    intrinsic value exactly.
    """
    F = np.asarray(F, dtype=float)
    K = np.asarray(K, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    _check_omega(omega)
    if np.any(sigma < 0.0):
        raise DomainError("Bachelier volatility must be >= 0")
    omega = np.asarray(omega, dtype=float)
    moneyness = omega * (F - K)
    positive = sigma > 0.0
    safe = np.where(positive, sigma, 1.0)
    d = moneyness / safe
    # in the money: intrinsic plus the out-of-the-money time value, avoiding cancellation
    a = -np.abs(d)
    time_value = safe * (a * ndtr(a) + np.exp(-0.5 * a * a) / SQRT_2PI)
    value = np.maximum(moneyness, 0.0) + time_value
    out = np.where(positive, value, np.maximum(moneyness, 0.0))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Simpson quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    lower: float
    upper: float
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.points < 3 or self.points % 2 == 0:
            raise DomainError(f"Simpson needs an odd number of points >= 3, got {self.points}")

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.points)

    def weights(self) -> np.ndarray:
        h = (self.upper - self.lower) / (self.points - 1)
        return simpson_weights(self.points) * h


def simpson_weights(points: int) -> np.ndarray:
    """Composite Simpson weights for unit node spacing."""
    w = np.ones(points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def simpson_1d(f: Callable, grid: QuadratureGrid) -> float:
    return float(np.sum(grid.weights() * f(grid.nodes())))


def simpson_2d(f: Callable, grid_x: QuadratureGrid, grid_y: QuadratureGrid) -> float:
    """Tensor-product Simpson rule; ``f`` is called on meshgrid arrays (ij indexing)."""
    X, Y = np.meshgrid(grid_x.nodes(), grid_y.nodes(), indexing="ij")
    W = np.outer(grid_x.weights(), grid_y.weights())
    return float(np.sum(W * f(X, Y)))


def _panel(lo, hi, points):
    """Nodes and weights of one Simpson panel per row of ``lo``/``hi``."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    t = np.linspace(0.0, 1.0, points)
    nodes = lo + (hi - lo) * t
    weights = simpson_weights(points) * (hi - lo) / (points - 1)
    return nodes, weights


def _segments(lo, hi, breaks, points):
    """Split ``[lo, hi]`` at the (per-row) ``breaks`` and stack Simpson panels.

    Breaks outside the interval, or NaN, produce empty panels.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    cuts = [lo]
    for b in breaks:
        b = np.asarray(b, dtype=float)
        b = np.where(np.isnan(b), lo, b)
        cuts.append(np.clip(b, lo, hi))
    cuts.append(hi)
    cuts = np.sort(np.stack(np.broadcast_arrays(*cuts), axis=-1), axis=-1)
    nodes, weights = [], []
    for k in range(cuts.shape[-1] - 1):
        n, w = _panel(cuts[..., k], cuts[..., k + 1], points)
        nodes.append(n)
        weights.append(w)
    return np.concatenate(nodes, axis=-1), np.concatenate(weights, axis=-1)


def gaussian_expectation(func, law: NormalLaw, points=DEFAULT_POINTS, width=DEFAULT_WIDTH, breaks=()):
    """``E[func(X)]`` for ``X ~ law`` by Simpson over ``mean +- width * stdev``.

    ``breaks`` are points where ``func`` has a kink; the domain is split there
    so that each panel integrates a smooth function.
    """
    if law.stdev == 0.0:
        return float(func(np.array([law.mean]))[0])
    lo = law.mean - width * law.stdev
    hi = law.mean + width * law.stdev
    x, w = _segments(lo, hi, breaks, points)
    dens = norm_pdf((x - law.mean) / law.stdev) / law.stdev
    return float(np.sum(w * dens * func(x)))


def gaussian_expectation_2d(
    func,
    law_x: NormalLaw,
    law_y: NormalLaw,
    rho: float,
    points=DEFAULT_POINTS,
    width=DEFAULT_WIDTH,
    x_breaks=(),
    y_break=None,
):
    """``E[func(X, Y)]`` for a bivariate normal by iterated Simpson quadrature.

    The outer integral runs over ``X`` (split at ``x_breaks``); the inner one
    over the conditional law of ``Y`` given each outer node. ``y_break(x, lo, hi)``
    may return, per outer node, the location of a kink of ``func`` in ``y``
    (NaN when there is none inside ``[lo, hi]``). ``|rho| = 1`` or a zero
    stdev degenerates the corresponding integral to a point evaluation.
    """
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    if law_x.stdev == 0.0:
        x = np.array([law_x.mean])
        wx = np.array([1.0])
        cond_mean = np.array([law_y.mean])
    else:
        lo = law_x.mean - width * law_x.stdev
        hi = law_x.mean + width * law_x.stdev
        x, wx = _segments(lo, hi, x_breaks, points)
        wx = wx * norm_pdf((x - law_x.mean) / law_x.stdev) / law_x.stdev
        cond_mean = law_y.mean + rho * law_y.stdev * (x - law_x.mean) / law_x.stdev
    cond_sd = law_y.stdev * math.sqrt(max(1.0 - rho * rho, 0.0))
    inner = conditional_expectation(func, x, cond_mean, cond_sd, points, width, y_break)
    return float(np.sum(wx * inner))


def conditional_expectation(func, x, cond_mean, cond_sd, points=DEFAULT_POINTS, width=DEFAULT_WIDTH, y_break=None):
    """Per-node ``E[func(x_k, Y_k)]`` with ``Y_k ~ N(cond_mean_k, cond_sd)``.

    ``cond_sd`` is shared by all nodes; zero collapses each integral to a
    point evaluation. ``y_break`` as in :func:`gaussian_expectation_2d`.
    """
    x = np.asarray(x, dtype=float)
    cond_mean = np.broadcast_to(np.asarray(cond_mean, dtype=float), x.shape)
    if cond_sd == 0.0:
        return func(x, cond_mean)
    lo = cond_mean - width * cond_sd
    hi = cond_mean + width * cond_sd
    breaks = () if y_break is None else (y_break(x, lo, hi),)
    y, wy = _segments(lo, hi, breaks, points)
    dens = norm_pdf((y - cond_mean[:, None]) / cond_sd) / cond_sd
    return np.sum(wy * dens * func(x[:, None], y), axis=-1)


def bisect_crossing(h, lo, hi, iterations=60):
    """Per-row root of ``h`` on ``[lo, hi]`` by vectorised bisection.

    ``h(y)`` maps an array of one abscissa per row to one value per row.
    Rows without a sign change return NaN.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    h_lo = h(lo)
    h_hi = h(hi)
    bracketed = np.sign(h_lo) * np.sign(h_hi) < 0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        h_mid = h(mid)
        left = np.sign(h_mid) == np.sign(h_lo)
        lo = np.where(left, mid, lo)
        h_lo = np.where(left, h_mid, h_lo)
        hi = np.where(left, hi, mid)
    return np.where(bracketed, 0.5 * (lo + hi), np.nan)


# ---------------------------------------------------------------------------
# Clark moment matching


def _check_corr(rho, name="rho"):
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {rho}")


def _spread_stdev(a: NormalLaw, b: NormalLaw, rho: float) -> float:
    # (sa - sb)^2 + 2(1 - rho) sa sb: non-negative without cancellation
    return math.sqrt((a.stdev - b.stdev) ** 2 + 2.0 * (1.0 - rho) * a.stdev * b.stdev)


def clark_max_moments(a: NormalLaw, b: NormalLaw, rho: float) -> tuple[float, float]:
    """Exact mean and stdev of ``max(A, B)`` for jointly normal ``A``, ``B``."""
    _check_corr(rho)
    nu = _spread_stdev(a, b, rho)
    if nu == 0.0:
        top = a if a.mean >= b.mean else b
        return top.mean, top.stdev
    # centre first: max is translation equivariant and this avoids cancellation
    c = 0.5 * (a.mean + b.mean)
    ma, mb = a.mean - c, b.mean - c
    alpha = (ma - mb) / nu
    pa, pb, dens = ndtr(alpha), ndtr(-alpha), norm_pdf(alpha)
    m1 = ma * pa + mb * pb + nu * dens
    m2 = (ma * ma + a.stdev**2) * pa + (mb * mb + b.stdev**2) * pb + (ma + mb) * nu * dens
    var = max(m2 - m1 * m1, 0.0)
    return m1 + c, math.sqrt(var)


def clark_running_corr(a: NormalLaw, b: NormalLaw, rho_ab, rho_ac, rho_bc, max_moments) -> float:
    """Correlation of ``max(A, B)`` with a third normal ``C``."""
    for name, r in (("rho_ab", rho_ab), ("rho_ac", rho_ac), ("rho_bc", rho_bc)):
        _check_corr(r, name)
    nu = _spread_stdev(a, b, rho_ab)
    if nu == 0.0:
        p = 1.0 if a.mean >= b.mean else 0.0
    else:
        p = float(ndtr((a.mean - b.mean) / nu))
    sd_max = max_moments[1]
    if sd_max == 0.0:
        return rho_ac if p == 1.0 else rho_bc
    value = (a.stdev * rho_ac * p + b.stdev * rho_bc * (1.0 - p)) / sd_max
    return min(max(value, -1.0), 1.0)


def clark_max(means: Sequence[float], stdevs: Sequence[float], corr, order=None) -> NormalLaw:
    """Gaussian approximation of the maximum of ``n`` correlated normals.

    Members are folded into a running maximum whose first two moments are
    matched at every step. The default order is descending mean.
    """
    means = np.asarray(means, dtype=float)
    stdevs = np.asarray(stdevs, dtype=float)
    corr = np.asarray(corr, dtype=float)
    n = len(means)
    if n == 0:
        raise DomainError("clark_max needs at least one variable")
    if order is None:
        order = np.argsort(-means, kind="stable")
    order = [int(k) for k in order]
    if sorted(order) != list(range(n)):
        raise DomainError(f"order must be a permutation of range({n}), got {order}")
    first = order[0]
    running = NormalLaw(means[first], stdevs[first])
    run_corr = corr[first].copy()
    for pos, k in enumerate(order[1:], start=1):
        b = NormalLaw(means[k], stdevs[k])
        rho_ab = float(np.clip(run_corr[k], -1.0, 1.0))
        moments = clark_max_moments(running, b, rho_ab)
        new_corr = run_corr.copy()
        for c in order[pos + 1:]:
            new_corr[c] = clark_running_corr(
                running, b, rho_ab,
                float(np.clip(run_corr[c], -1.0, 1.0)),
                float(np.clip(corr[k, c], -1.0, 1.0)),
                moments,
            )
        running = NormalLaw(*moments)
        run_corr = new_corr
    return running


# ---------------------------------------------------------------------------
# correlation matrices


@dataclass(frozen=True)
class RepairReport:
    repaired: bool
    min_eigenvalue: float
    frobenius_distance: float


def validate_correlation_matrix(m, tol=1e-10) -> tuple[np.ndarray, RepairReport]:
    """Check a correlation matrix and project it onto the PSD cone if needed.

    Negative eigenvalues are clipped to zero and the result rescaled to unit
    diagonal. The report carries the Frobenius distance to the input.
    """
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"correlation matrix must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
        raise DomainError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(m), 1.0, atol=1e-12, rtol=0.0):
        raise DomainError("correlation matrix must have unit diagonal")
    if np.any(np.abs(m) > 1.0 + 1e-12):
        raise DomainError("correlation entries must lie in [-1, 1]")
    lam_min = float(np.linalg.eigvalsh(m)[0])
    if lam_min >= -tol:
        return m, RepairReport(False, lam_min, 0.0)
    lam, vec = np.linalg.eigh(m)
    psd = (vec * np.maximum(lam, 0.0)) @ vec.T
    d = np.sqrt(np.diag(psd))
    repaired = psd / np.outer(d, d)
    repaired = 0.5 * (repaired + repaired.T)
    np.fill_diagonal(repaired, 1.0)
    distance = float(np.linalg.norm(repaired - m))
    return repaired, RepairReport(True, lam_min, distance)
