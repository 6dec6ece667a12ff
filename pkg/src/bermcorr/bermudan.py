"""Bermudan swaptions on a coterminal family of swap rates.

Two pricers share the :class:`~bermcorr.coterminal.CoterminalSet` inputs:

* ``price_bermudan_mm`` treats every coterminal exercise value as a Gaussian
  and approximates ``E[max(0, V_1, ..., V_n)]`` by Clark moment matching,
  with correlations from the coterminal triangle identity.
* ``price_bermudan_lattice`` rolls the value function back one exercise at a
  time. Between ``T_{j-1}`` and ``T_j`` the next coterminal rate splits into
  the midcurve rate ``Z_j`` (known at ``T_{j-1}``) plus an independent
  forward increment; the increment is integrated out first, then the
  bivariate law of ``(X_{j-1}, Z_j)``.

All values are carried per unit of the last coterminal annuity
``A(t, T_n, T_e)``, so exercise ``i`` pays ``w_i (omega (x - K))^+`` with
``w_i = A(t, T_i, T_e) / A(t, T_n, T_e)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtr

from .analytics import (
    DEFAULT_POINTS,
    DEFAULT_WIDTH,
    NormalLaw,
    _segments,
    bachelier,
    clark_max,
    conditional_expectation,
    gaussian_expectation,
    gaussian_expectation_2d,
    norm_pdf,
    validate_correlation_matrix,
)
from .canary import exercise_max_parts
from .coterminal import CoterminalSet, triangle_correlation, z_correlation
from .errors import DegenerateDistributionError, DomainError, GridError, ModelError
from .results import PricingResult

REPAIR_WARN = 0.05
REPAIR_FAIL = 0.2
BOUNDARY_MASS = 1e-7


@dataclass(frozen=True)
class BermudanSwaption:
    exercises: tuple
    end: float
    strike: float
    omega: int = 1

    def __post_init__(self):
        ex = tuple(float(t) for t in self.exercises)
        object.__setattr__(self, "exercises", ex)
        if not ex:
            raise DomainError("a Bermudan needs at least one exercise date")
        if ex[0] <= 0.0 or any(b <= a for a, b in zip(ex, ex[1:])) or ex[-1] >= self.end:
            raise DomainError("exercise dates must be positive, strictly increasing and before the end")
        if self.omega not in (1, -1):
            raise DomainError(f"omega must be +1 or -1, got {self.omega}")


def _check_trade(trade: BermudanSwaption, cset: CoterminalSet):
    if len(trade.exercises) != cset.n or not np.allclose(trade.exercises, cset.times, atol=1e-9):
        raise DomainError("trade exercise dates do not match the coterminal set")
    if abs(trade.end - cset.end) > 1e-9:
        raise DomainError("trade end does not match the coterminal set")


# ---------------------------------------------------------------------------
# correlations


def coterminal_corr(cset: CoterminalSet, i: int, j: int, short_leg_denominator: bool = False) -> float:
    """Correlation of ``X_i`` and ``X_j`` under perfectly correlated forward rates.

    Law of cosines on ``A_je X_j = A_ie X_i - A_ij Y`` with
    ``Y = R(T_i, T_i, T_j)``. ``short_leg_denominator=True`` swaps the denominator for
    ``2 A_ie A_ij sigma_j sigma_ij``, kept only for comparison.
    """
    if i == j:
        return 1.0
    if i > j:
        i, j = j, i
    br = cset.bridge(i, j)
    if br.sigma is None:
        raise DegenerateDistributionError(
            f"no short-rate vol between {cset.times[i]} and {cset.times[j]}"
        )
    a_ie, a_je, a_ij = cset.annuities[i], cset.annuities[j], br.annuity
    s_i, s_j, s_ij = cset.sigmas[i], cset.sigmas[j], br.sigma
    if not short_leg_denominator:
        return triangle_correlation(a_ie, a_je, a_ij, s_i, s_j, s_ij)
    den = 2.0 * a_ie * a_ij * s_j * s_ij
    if den <= 0.0:
        raise DegenerateDistributionError("zero vol in coterminal correlation")
    num = (a_ie * s_i) ** 2 + (a_je * s_j) ** 2 - (a_ij * s_ij) ** 2
    return float(np.clip(num / den, -1.0, 1.0))


def general_cross_corr(cset: CoterminalSet, i: int, j: int, rho_iy=None, rho_xj=None) -> float:
    """Correlation of ``X_i`` and ``X_j`` through the midcurve rate ``Z = E[X_j | F_{T_i}]``.

    ``corr(X_i, Z) * corr(X_j, Z)``. ``rho_iy`` defaults to the configured
    long/short correlation and ``rho_xj`` to ``sigma_Z / sigma_j``.
    """
    if i == j:
        return 1.0
    if i > j:
        i, j = j, i
    br = cset.bridge(i, j)
    if rho_iy is None:
        rho_iy = br.rho_long_short
    if rho_xj is None:
        rho_xj = cset.rho_forward(i, j)
    for name, r in (("rho_iy", rho_iy), ("rho_xj", rho_xj)):
        if r is not None and not -1.0 <= r <= 1.0:
            raise DomainError(f"{name} must lie in [-1, 1], got {r}")
    if rho_iy is None:
        return float(np.clip(cset.corr_xi_z(i, j) * rho_xj, -1.0, 1.0))
    if br.sigma is None:
        raise DegenerateDistributionError(
            f"no short-rate vol between {cset.times[i]} and {cset.times[j]}"
        )
    return float(np.clip(
        z_correlation(cset.annuities[i], br.annuity, cset.sigmas[i], br.sigma, rho_iy) * rho_xj,
        -1.0, 1.0,
    ))


def correlation_matrix(cset: CoterminalSet, mode: str = "perfect", short_leg_denominator: bool = False) -> np.ndarray:
    """Coterminal correlation matrix; members with zero vol get zero correlation.

    ``mode`` selects the entry for ``i < j``:

    * ``"perfect"``: ``corr(X_i, Z)`` with the midcurve rate standing in for
      ``X_j``, from the configured long/short correlation when there is one
      and from the vol triangle otherwise;
    * ``"triangle"``: always the vol triangle (:func:`coterminal_corr`);
    * ``"general"``: :func:`general_cross_corr`, which also multiplies in the
      correlation of ``X_j`` with its conditional mean.
    """
    if mode not in ("perfect", "triangle", "general"):
        raise DomainError(f"mode must be 'perfect', 'triangle' or 'general', got {mode!r}")
    n = cset.n
    m = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            if cset.sigmas[i] == 0.0 or cset.sigmas[j] == 0.0:
                continue
            if mode == "general":
                r = general_cross_corr(cset, i, j)
            elif mode == "perfect" and cset.bridge(i, j).rho_long_short is not None:
                r = general_cross_corr(cset, i, j, rho_xj=1.0)
            else:
                r = coterminal_corr(cset, i, j, short_leg_denominator)
            m[i, j] = m[j, i] = r
    return m


def _resolve_corr(cset, corr, mode, short_leg_denominator):
    if corr is None:
        return correlation_matrix(cset, mode, short_leg_denominator)
    if np.ndim(corr) == 0:
        m = np.full((cset.n, cset.n), float(corr))
        np.fill_diagonal(m, 1.0)
        return m
    m = np.asarray(corr, dtype=float)
    if m.shape != (cset.n, cset.n):
        raise DomainError(f"correlation override must be {cset.n}x{cset.n}, got {m.shape}")
    return m


# ---------------------------------------------------------------------------
# Europeans and moment matching


def floor_last_order(means) -> list:
    """Descending-mean order of the exercise values, then the zero floor."""
    means = np.asarray(means, dtype=float)
    return [int(k) for k in np.argsort(-means, kind="stable")] + [len(means)]


def european_values(trade: BermudanSwaption, cset: CoterminalSet) -> np.ndarray:
    """Per-``A_n`` value of each standalone European on its coterminal swap."""
    _check_trade(trade, cset)
    return cset.weights * bachelier(cset.shifted_forwards, trade.strike, cset.sigmas, trade.omega)


def price_bermudan_mm(
    trade: BermudanSwaption,
    cset: CoterminalSet,
    corr=None,
    mode: str = "perfect",
    order=None,
    short_leg_denominator: bool = False,
) -> PricingResult:
    """Clark-matched ``A_n E[max(0, V_1, ..., V_n)]``, ``V_i ~ N(w_i omega (mu_i - K), w_i sigma_i)``.

    Parameters
    ----------
    corr : None, float or (n, n) array
        Correlation override; a scalar fills every off-diagonal entry.
        By default the matrix is assembled from the coterminal set.
    order : sequence of int, optional
        Recursion order over the ``n + 1`` members, the zero floor being
        index ``n``. Defaults to the exercise values by descending mean with
        the floor folded in last, which makes the final step exact.
    """
    _check_trade(trade, cset)
    n = cset.n
    raw = _resolve_corr(cset, corr, mode, short_leg_denominator)
    matrix, report = validate_correlation_matrix(raw)
    if report.frobenius_distance > REPAIR_FAIL:
        raise ModelError(
            f"correlation matrix needs a repair of Frobenius size {report.frobenius_distance:.3g} "
            f"(limit {REPAIR_FAIL})"
        )
    w = cset.weights
    means = np.append(w * trade.omega * (cset.shifted_forwards - trade.strike), 0.0)
    stdevs = np.append(w * cset.sigmas, 0.0)
    full = np.eye(n + 1)
    full[:n, :n] = matrix
    if order is None:
        order = floor_last_order(means[:n])
    law = clark_max(means, stdevs, full, order=order)
    warnings = []
    if report.frobenius_distance > REPAIR_WARN:
        warnings.append(
            f"correlation matrix repaired at Frobenius distance {report.frobenius_distance:.3g}"
        )
    return PricingResult.from_per_annuity(
        law.mean, cset.annuities[-1], "mm",
        correlation=matrix.tolist(),
        repaired=report.repaired,
        repair_distance=report.frobenius_distance,
        min_eigenvalue=report.min_eigenvalue,
        order=[int(k) for k in order],
        sigmas=cset.sigmas.tolist(),
        weights=w.tolist(),
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# lattice


class _LatticeFunction:
    """Cubic spline through grid values, extended linearly with the edge slopes."""

    def __init__(self, grid, values):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if np.any(np.diff(self.grid) <= 0.0):
            raise GridError("lattice grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise GridError("lattice values must be finite")
        self._spline = CubicSpline(self.grid, self.values, bc_type="not-a-knot")
        d = self._spline.derivative()
        self._lo, self._hi = self.grid[0], self.grid[-1]
        self._slope_lo, self._slope_hi = float(d(self._lo)), float(d(self._hi))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, self._lo, self._hi)
        out = self._spline(inside)
        out = out + np.where(x < self._lo, (x - self._lo) * self._slope_lo, 0.0)
        return out + np.where(x > self._hi, (x - self._hi) * self._slope_hi, 0.0)


def _convolve(func, grid, sd, points, width, breaks=()):
    """``E[func(x + e)]`` at every grid node with ``e ~ N(0, sd)``."""
    if sd == 0.0:
        return func(grid)
    e, w = _segments(-width * sd, width * sd, breaks, points)
    dens = w * norm_pdf(e / sd) / sd
    return np.array([np.sum(dens * func(x + e)) for x in grid])


@dataclass(frozen=True)
class _Step:
    sigma_z: float
    forward_vol: float
    rho: float


def _step_data(cset: CoterminalSet, k: int) -> _Step:
    """Midcurve vol, residual vol and ``corr(X_{k-1}, Z_k)`` for the step ``T_{k-1} -> T_k``."""
    br = cset.bridge(k - 1, k)
    sig_k = cset.sigmas[k]
    if br.rho_forward is not None:
        sz = br.rho_forward * sig_k
    else:
        sz = cset.sigma_z(k - 1, k)
    if sz > sig_k * (1.0 + 1e-12):
        raise ModelError(
            f"negative forward variance between {cset.times[k - 1]} and {cset.times[k]}: "
            f"midcurve vol {sz:.6g} exceeds coterminal vol {sig_k:.6g}"
        )
    fwd = math.sqrt(max(sig_k**2 - sz**2, 0.0))
    rho = 0.0 if sz == 0.0 or cset.sigmas[k - 1] == 0.0 else cset.corr_xi_z(k - 1, k)
    return _Step(float(sz), fwd, float(rho))


def price_bermudan_lattice(
    trade: BermudanSwaption,
    cset: CoterminalSet,
    points: int = DEFAULT_POINTS,
    width: float = DEFAULT_WIDTH,
) -> PricingResult:
    """Backward induction over the exercise dates with iterated Simpson quadrature.

    The value function after exercise ``j`` is kept on a grid as a spline.
    Its convolution with the forward increment gives the continuation value
    as a function of the midcurve rate, and the next value function is the
    conditional expectation of ``max(exercise, continuation)``. Quadrature
    panels are split at the strike and at the exercise boundary.
    """
    _check_trade(trade, cset)
    if 2.0 * ndtr(-width) > BOUNDARY_MASS:
        raise GridError(
            f"grid half-width of {width} stdevs leaves {2.0 * ndtr(-width):.2g} of mass outside "
            f"(limit {BOUNDARY_MASS:g})"
        )
    if points < 3 or points % 2 == 0:
        raise GridError(f"points must be odd and >= 3, got {points}")
    n = cset.n
    K, omega = trade.strike, trade.omega
    w = cset.weights
    mu = cset.shifted_forwards
    sig = cset.sigmas
    a_n = cset.annuities[-1]

    if n == 1:
        value = gaussian_expectation(
            lambda x: np.maximum(omega * (x - K), 0.0),
            NormalLaw(mu[0], sig[0]), points, width, breaks=(K,),
        )
        return PricingResult.from_per_annuity(
            value, a_n, "lattice", points=points, width=width, steps=[],
        )

    steps = {k: _step_data(cset, k) for k in range(1, n)}

    # forward pass: half-widths so that no lattice function is extrapolated
    half_x = {0: width * sig[0]}
    half_z = {}
    for k in range(1, n):
        st = steps[k]
        lead = abs(st.rho) * st.sigma_z / sig[k - 1] * half_x[k - 1] if sig[k - 1] > 0.0 else 0.0
        half_z[k] = lead + width * st.sigma_z * math.sqrt(max(1.0 - st.rho**2, 0.0))
        half_x[k] = half_z[k] + width * st.forward_vol

    # continuation of the last step: the payoff convolved with the forward increment
    last = steps[n - 1]
    continuation = lambda z, s=last.forward_vol: bachelier(z, K, s, omega)
    kink = K if last.forward_vol == 0.0 else None

    diag_steps = [None] * (n - 1)
    for k in range(n - 1, 1, -1):
        st = steps[k]
        prev = k - 1
        # value function at T_{k-1} on its own grid
        lo, hi = mu[prev] - half_x[prev], mu[prev] + half_x[prev]
        x = np.linspace(lo, hi, points)
        if sig[prev] > 0.0:
            cond_mean = mu[k] + st.rho * st.sigma_z / sig[prev] * (x - mu[prev])
        else:
            cond_mean = np.full_like(x, mu[k])
        cond_sd = st.sigma_z * math.sqrt(max(1.0 - st.rho**2, 0.0))
        integrand, y_break = exercise_max_parts(w[prev], K, omega, continuation, kink)
        values = conditional_expectation(integrand, x, cond_mean, cond_sd, points, width, y_break)
        f_prev = _LatticeFunction(x, values)

        # continuation at T_{k-2} as a function of the midcurve rate Z_{k-1}
        up = steps[prev]
        z_grid = np.linspace(mu[prev] - half_z[prev], mu[prev] + half_z[prev], points)
        g_values = _convolve(f_prev, z_grid, up.forward_vol, points, width)
        continuation = f_prev if up.forward_vol == 0.0 else _LatticeFunction(z_grid, g_values)
        kink = None
        diag_steps[k - 1] = {
            "exercise": cset.times[k],
            "sigma_z": st.sigma_z,
            "forward_vol": st.forward_vol,
            "rho_x_z": st.rho,
            "x_grid": [float(x[0]), float(x[-1]), int(x.size)],
            "z_grid": [float(z_grid[0]), float(z_grid[-1]), int(z_grid.size)],
        }

    first = steps[1]
    integrand, y_break = exercise_max_parts(w[0], K, omega, continuation, kink)
    value = gaussian_expectation_2d(
        integrand, NormalLaw(mu[0], sig[0]), NormalLaw(mu[1], first.sigma_z), first.rho,
        points, width, x_breaks=(K,), y_break=y_break,
    )
    diag_steps[0] = {
        "exercise": cset.times[1],
        "sigma_z": first.sigma_z,
        "forward_vol": first.forward_vol,
        "rho_x_z": first.rho,
    }
    return PricingResult.from_per_annuity(
        value, a_n, "lattice",
        points=points, width=width, steps=diag_steps, weights=w.tolist(),
    )
