"""Swaptions whose strike is a spread over the ATM rate fixed at an earlier date."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytics import bachelier
from .errors import DomainError, ModelError
from .market import DiscountCurve, SwapSpec, annuity
from .results import PricingResult
from .volsurface import CorrelationConfig, VolSurface, midcurve_vol_approx


@dataclass(frozen=True)
class RelativeStrikeSwaption:
    fix_time: float
    swap: SwapSpec
    spread: float
    omega: int = 1
    vol_spread_mult: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.fix_time <= self.swap.start:
            raise DomainError(
                f"fix_time must lie in [0, start={self.swap.start}], got {self.fix_time}"
            )
        if self.omega not in (1, -1):
            raise DomainError(f"omega must be +1 or -1, got {self.omega}")
        if not self.vol_spread_mult > 0.0:
            raise DomainError("vol_spread_mult must be positive")


@dataclass(frozen=True)
class FixingVols:
    """Absolute vols: ``sigma_x`` of the rate fixed at its start, ``sigma_z`` of the same
    forward rate fixed at the strike fixing date."""

    sigma_x: float
    sigma_z: float

    def __post_init__(self):
        if self.sigma_x < 0.0 or self.sigma_z < 0.0:
            raise DomainError("fixing vols must be non-negative")

    @property
    def forward_vol(self) -> float:
        """``sqrt(sigma_x^2 - sigma_z^2)``; raises when the forward variance is negative."""
        if self.sigma_z > self.sigma_x * (1.0 + 1e-12):
            raise ModelError(
                f"negative forward variance: sigma_z={self.sigma_z} > sigma_x={self.sigma_x}"
            )
        return math.sqrt(max(self.sigma_x**2 - self.sigma_z**2, 0.0))


def fixing_correlation(vols: FixingVols) -> float:
    """Correlation between a rate fixed at ``T_fix`` and the same rate fixed at ``T_s``."""
    if vols.sigma_x == 0.0:
        raise DomainError("sigma_x must be positive")
    if vols.sigma_z > vols.sigma_x * (1.0 + 1e-12):
        raise ModelError(
            f"negative forward variance: sigma_z={vols.sigma_z} > sigma_x={vols.sigma_x}"
        )
    return min(vols.sigma_z / vols.sigma_x, 1.0)


def price_relative_strike(trade: RelativeStrikeSwaption, annuity_value: float, vols: FixingVols) -> PricingResult:
    fwd = vols.forward_vol
    if fwd == 0.0:
        per_annuity = max(trade.omega * trade.spread, 0.0)
    else:
        per_annuity = bachelier(0.0, trade.spread, trade.vol_spread_mult * fwd, trade.omega)
    return PricingResult.from_per_annuity(
        per_annuity, annuity_value, "integral",
        sigma_x=vols.sigma_x, sigma_z=vols.sigma_z, forward_vol=fwd,
        vol_spread_mult=trade.vol_spread_mult,
    )


def fixing_vols_from_market(
    trade: RelativeStrikeSwaption,
    curve: DiscountCurve,
    surface: VolSurface,
    corr: CorrelationConfig,
) -> FixingVols:
    """Absolute fixing vols; ``sigma_z`` is the midcurve vol of the underlying at ``T_fix``.

    Smiles are read at the offset ``spread`` from each rate's own ATM, which is
    the midcurve strike mapping applied to the strike ``ATM + spread``.
    """
    s, e, freq = trade.swap.start, trade.swap.end, trade.swap.fixed_frequency
    sigma_x = surface.smile(s, s, e)(trade.spread) * math.sqrt(s)
    t_fix = trade.fix_time
    override = corr.forward_fix_corr(t_fix, s, e)
    if override is not None:
        return FixingVols(sigma_x, override * sigma_x)
    if t_fix == 0.0:
        return FixingVols(sigma_x, 0.0)
    long = SwapSpec(t_fix, e, freq)
    sig_e = surface.smile(t_fix, t_fix, e)(trade.spread)
    if s - t_fix < 1e-12:
        return FixingVols(sigma_x, sig_e * math.sqrt(t_fix))
    short = SwapSpec(t_fix, s, freq)
    sig_s = surface.smile(t_fix, t_fix, s)(trade.spread)
    mid = midcurve_vol_approx(
        annuity(curve, long), annuity(curve, short), annuity(curve, trade.swap),
        sig_e, sig_s, corr.long_short_corr(t_fix, s),
    )
    return FixingVols(sigma_x, mid * math.sqrt(t_fix))
