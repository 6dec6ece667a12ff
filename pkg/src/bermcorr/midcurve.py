"""Midcurve swaptions as options on a weighted basket of two spot-starting rates.

A swap ``(T_s, T_e)`` seen from its expiry ``T_ex <= T_s`` satisfies
``R_fwd = a R_long - b R_short`` with the long rate ``R(T_ex, T_ex, T_e)``,
the short rate ``R(T_ex, T_ex, T_s)`` and annuity ratios ``a``, ``b``. The
option is priced by integrating the basket payoff against a Gaussian copula
of the two rates, each with a Gaussian marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import DEFAULT_POINTS, DEFAULT_WIDTH, NormalLaw, bachelier, gaussian_expectation_2d
from .errors import DomainError, ModelError
from .market import DiscountCurve, SwapSpec, annuity, par_rate
from .results import PricingResult
from .volsurface import CorrelationConfig, VolSurface, apply_convexity_shift, midcurve_vol_approx

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class MidcurveSwaption:
    expiry: float
    swap: SwapSpec
    strike: float
    omega: int = 1

    def __post_init__(self):
        if not 0.0 < self.expiry <= self.swap.start + _TIME_TOL:
            raise DomainError(f"need 0 < expiry <= start, got {self.expiry}, {self.swap.start}")
        if self.omega not in (1, -1):
            raise DomainError(f"omega must be +1 or -1, got {self.omega}")

    @property
    def degenerate(self) -> bool:
        """True when the swap starts at expiry, so there is no short leg."""
        return self.swap.start - self.expiry < _TIME_TOL


@dataclass(frozen=True)
class BasketWeights:
    """``a = A(t, T_ex, T_e) / A(t, T_s, T_e)`` and ``b = A(t, T_ex, T_s) / A(t, T_s, T_e)``."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0.0 or self.b < 0.0:
            raise DomainError(f"need a > 0 and b >= 0, got a={self.a}, b={self.b}")

    @classmethod
    def from_curve(cls, curve: DiscountCurve, expiry: float, swap: SwapSpec) -> "BasketWeights":
        a_fwd = annuity(curve, swap)
        a_long = annuity(curve, SwapSpec(expiry, swap.end, swap.fixed_frequency))
        if swap.start - expiry < _TIME_TOL:
            return cls(a_long / a_fwd, 0.0)
        a_short = annuity(curve, SwapSpec(expiry, swap.start, swap.fixed_frequency))
        return cls(a_long / a_fwd, a_short / a_fwd)


@dataclass(frozen=True)
class MidcurveInputs:
    """Gaussian copula inputs; ``sigma_e`` and ``sigma_s`` are absolute vols to expiry."""

    weights: BasketWeights
    annuity: float
    mu_e: float
    mu_s: float
    sigma_e: float
    sigma_s: float
    rho: float
    delta_e: float = 0.0
    delta_s: float = 0.0

    def __post_init__(self):
        if self.sigma_e < 0.0 or self.sigma_s < 0.0:
            raise DomainError("vols must be non-negative")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"long/short correlation must lie in [-1, 1], got {self.rho}")
        if not self.annuity > 0.0:
            raise DomainError("annuity must be positive")

    @property
    def law_long(self) -> NormalLaw:
        return NormalLaw(apply_convexity_shift(self.mu_e, self.sigma_e, self.delta_e), self.sigma_e)

    @property
    def law_short(self) -> NormalLaw:
        return NormalLaw(apply_convexity_shift(self.mu_s, self.sigma_s, self.delta_s), self.sigma_s)

    @property
    def forward(self) -> float:
        """Basket forward ``a mu_e - b mu_s`` at the (shifted) means."""
        return self.weights.a * self.law_long.mean - self.weights.b * self.law_short.mean


def _leg_smiles(trade: MidcurveSwaption, surface: VolSurface):
    t, e, s = trade.expiry, trade.swap.end, trade.swap.start
    long = surface.smile(t, t, e)
    short = None if trade.degenerate else surface.smile(t, t, s)
    return long, short


def midcurve_inputs(
    trade: MidcurveSwaption,
    curve: DiscountCurve,
    surface: VolSurface,
    corr: CorrelationConfig,
) -> MidcurveInputs:
    """Copula inputs read off the market.

    Both legs are looked up at the strike offset ``K - R_fwd``, i.e. at
    ``K_e = R_e + (K - R_fwd)`` and ``K_s = R_s + (K - R_fwd)``. The long leg
    takes the convexity shift configured for the expiry; the short leg only
    one keyed by its own ``(expiry, start, end)``.
    """
    t, spec = trade.expiry, trade.swap
    weights = BasketWeights.from_curve(curve, t, spec)
    offset = trade.strike - par_rate(curve, spec)
    long_smile, short_smile = _leg_smiles(trade, surface)
    root_t = math.sqrt(t)
    long_spec = SwapSpec(t, spec.end, spec.fixed_frequency)
    mu_e = par_rate(curve, long_spec)
    sigma_e = long_smile(offset) * root_t
    if trade.degenerate:
        mu_s, sigma_s, rho, delta_s = 0.0, 0.0, 0.0, 0.0
    else:
        mu_s = par_rate(curve, SwapSpec(t, spec.start, spec.fixed_frequency))
        sigma_s = short_smile(offset) * root_t
        rho = corr.long_short_corr(t, spec.start)
        delta_s = corr.rate_shift(t, t, spec.start)
    return MidcurveInputs(
        weights, annuity(curve, spec), mu_e, mu_s, sigma_e, sigma_s, rho,
        delta_e=corr.shift(t), delta_s=delta_s,
    )


def price_midcurve(
    trade: MidcurveSwaption,
    inputs: MidcurveInputs,
    points: int = DEFAULT_POINTS,
    width: float = DEFAULT_WIDTH,
) -> PricingResult:
    """``A E[(omega (a x - b y - K))^+]`` over the Gaussian copula of the two legs.

    Iterated Simpson quadrature over the long rate and then the short rate
    conditional on it, with panels split along the exercise line
    ``a x - b y = K``.
    """
    a, b = inputs.weights.a, inputs.weights.b
    K, omega = trade.strike, trade.omega
    lx, ly = inputs.law_long, inputs.law_short
    rho = inputs.rho

    def payoff(x, y):
        return np.maximum(omega * (a * x - b * y - K), 0.0)

    # kink in x when y is a deterministic function of x
    slope = rho * ly.stdev / lx.stdev if lx.stdev > 0.0 else 0.0
    denom = a - b * slope
    x_breaks = ()
    if denom != 0.0:
        x_breaks = ((K + b * (ly.mean - slope * lx.mean)) / denom,)
    y_break = None
    if b > 0.0:
        y_break = lambda x, lo, hi: (a * x - K) / b
    value = gaussian_expectation_2d(payoff, lx, ly, rho, points, width, x_breaks, y_break)
    return PricingResult.from_per_annuity(
        value, inputs.annuity, "integral",
        a=a, b=b, mu_e=lx.mean, mu_s=ly.mean, sigma_e=lx.stdev, sigma_s=ly.stdev,
        rho=rho, jacobian_weight=1.0, points=points, width=width,
    )


def implied_midcurve_vol(
    trade: MidcurveSwaption,
    curve: DiscountCurve,
    surface: VolSurface,
    corr: CorrelationConfig,
) -> float:
    """Per-annum normal vol of the forward-starting rate at the trade strike."""
    t, spec = trade.expiry, trade.swap
    offset = trade.strike - par_rate(curve, spec)
    long_smile, short_smile = _leg_smiles(trade, surface)
    a_long = annuity(curve, SwapSpec(t, spec.end, spec.fixed_frequency))
    a_fwd = annuity(curve, spec)
    if trade.degenerate:
        return midcurve_vol_approx(a_long, 0.0, a_fwd, long_smile(offset), 0.0, 0.0)
    a_short = annuity(curve, SwapSpec(t, spec.start, spec.fixed_frequency))
    return midcurve_vol_approx(
        a_long, a_short, a_fwd, long_smile(offset), short_smile(offset),
        corr.long_short_corr(t, spec.start),
    )


def price_midcurve_bachelier(trade, curve, surface, corr) -> PricingResult:
    """Bachelier price at the approximate midcurve vol; a quick cross-check of the copula."""
    vol = implied_midcurve_vol(trade, curve, surface, corr)
    a_fwd = annuity(curve, trade.swap)
    value = bachelier(par_rate(curve, trade.swap), trade.strike, vol * math.sqrt(trade.expiry), trade.omega)
    return PricingResult.from_per_annuity(value, a_fwd, "bachelier", implied_vol=vol)


def jacobian_weight(x, y, f, g, f_x=0.0, f_y=0.0, g_x=0.0, g_y=0.0):
    """Inverse Jacobian of ``(x, y) -> (f x, g y)``.

    ``f`` and ``g`` are the conditional annuity-ratio factors at ``(x, y)``
    and the remaining arguments their partial derivatives. Only used for
    diagnostics: pricing folds the ratios into convexity shifts.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if np.any(f <= 0.0) or np.any(g <= 0.0):
        raise DomainError("annuity-ratio factors f and g must be positive")
    det = (f + x * f_x) * (g + y * g_y) - x * y * f_y * g_x
    if np.any(det == 0.0):
        raise ModelError("change of variables is singular")
    out = 1.0 / det
    return float(out) if np.ndim(out) == 0 else out
