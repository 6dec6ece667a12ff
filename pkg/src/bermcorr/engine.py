"""Market bundle and the (trade kind, model) dispatch used by the estimator and CLI.

Models per kind (anything else is reported as not applicable):

=================  ========  ====  =======  ==
kind               integral  mm    lattice  mc
=================  ========  ====  =======  ==
european           yes       yes   yes      yes
relative_strike    yes                      yes
midcurve           yes                      yes
canary             yes       yes   yes      yes
bermudan           n <= 2    yes   yes      yes
=================  ========  ====  =======  ==

For Bermudans and Europeans ``mc`` samples the moment-matching law; for the
other kinds it samples the same Gaussian law as the integral pricer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .analytics import DEFAULT_POINTS, DEFAULT_WIDTH, bachelier
from .bermudan import BermudanSwaption, price_bermudan_lattice, price_bermudan_mm
from .canary import CanaryInputs, CanarySwaption, price_canary_integral, price_canary_mm
from .coterminal import CoterminalSet
from .errors import BermcorrError, DomainError
from .market import DiscountCurve, annuity
from .midcurve import midcurve_inputs, price_midcurve
from .oracle import (
    McSpec,
    mc_price_bermudan_mm_law,
    mc_price_canary,
    mc_price_midcurve,
    mc_price_relative_strike,
)
from .relstrike import fixing_vols_from_market, price_relative_strike
from .results import PricingResult
from .trades import Trade
from .volsurface import CorrelationConfig, VolSurface

MODELS = ("integral", "mm", "lattice", "mc")

_APPLICABLE = {
    "european": set(MODELS),
    "relative_strike": {"integral", "mc"},
    "midcurve": {"integral", "mc"},
    "canary": set(MODELS),
    "bermudan": set(MODELS),
}


class NotApplicable(BermcorrError):
    """The model does not price this kind of trade."""


@dataclass(frozen=True)
class MarketData:
    curve: DiscountCurve
    surface: VolSurface
    corr: CorrelationConfig

    @classmethod
    def from_files(cls, market, vols, corr) -> "MarketData":
        return cls(
            DiscountCurve.from_json(market),
            VolSurface.from_csv(vols),
            CorrelationConfig.from_json(corr),
        )


@dataclass(frozen=True)
class PricingSettings:
    points: int = DEFAULT_POINTS
    width: float = DEFAULT_WIDTH
    mc: Optional[McSpec] = None

    def mc_spec(self) -> McSpec:
        return self.mc if self.mc is not None else McSpec(100_000)


def applicable(kind: str, model: str) -> bool:
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    return model in _APPLICABLE[kind]


def applicable_to(trade: Trade, model: str) -> bool:
    """Like :func:`applicable`, also ruling out the integral model beyond two exercises."""
    if not applicable(trade.kind, model):
        return False
    return not (model == "integral" and trade.kind == "bermudan" and len(trade.get("exercises")) > 2)


def _mc_result(res, annuity_value, **diagnostics) -> PricingResult:
    return PricingResult(
        res.estimate, res.estimate / annuity_value, float(annuity_value), "mc",
        res.std_error, dict(paths=res.paths_used, **diagnostics),
    )


def price_trade(
    trade: Trade,
    market: MarketData,
    model: str,
    settings: PricingSettings = PricingSettings(),
    offset=None,
) -> PricingResult:
    """Price one trade with one model, at its own strike or at ``ATM + offset``."""
    if not applicable_to(trade, model):
        raise NotApplicable(f"model {model!r} does not apply to trade {trade.id} ({trade.kind})")
    product = trade.product(market.curve, offset)
    curve, surface, corr = market.curve, market.surface, market.corr
    pts, width = settings.points, settings.width

    if trade.kind == "relative_strike":
        a = annuity(curve, product.swap)
        vols = fixing_vols_from_market(product, curve, surface, corr)
        if model == "integral":
            return price_relative_strike(product, a, vols)
        res = mc_price_relative_strike(product, a, vols, settings.mc_spec())
        return _mc_result(res, a, sigma_x=vols.sigma_x, sigma_z=vols.sigma_z)

    if trade.kind == "midcurve":
        inputs = midcurve_inputs(product, curve, surface, corr)
        if model == "integral":
            return price_midcurve(product, inputs, pts, width)
        return _mc_result(mc_price_midcurve(product, inputs, settings.mc_spec()), inputs.annuity)

    if trade.kind == "canary":
        cset = CoterminalSet.from_market(
            [product.t1, product.t2], product.end, product.strike, curve, surface, corr, trade.frequency
        )
        inputs, a2 = CanaryInputs.from_coterminal(cset)
        if model == "integral":
            return price_canary_integral(product, inputs, a2, points=pts, width=width)
        if model == "mm":
            return price_canary_mm(product, inputs, a2)
        if model == "lattice":
            berm = BermudanSwaption((product.t1, product.t2), product.end, product.strike, product.omega)
            return price_bermudan_lattice(berm, cset, pts, width)
        return _mc_result(mc_price_canary(product, inputs, a2, settings.mc_spec()), a2)

    # european and bermudan share the coterminal machinery
    cset = CoterminalSet.from_market(
        product.exercises, product.end, product.strike, curve, surface, corr, trade.frequency
    )
    if model == "mm":
        return price_bermudan_mm(product, cset)
    if model == "lattice":
        return price_bermudan_lattice(product, cset, pts, width)
    if model == "mc":
        res = mc_price_bermudan_mm_law(product, cset, settings.mc_spec())
        return _mc_result(res, cset.annuities[-1])
    if cset.n == 1:
        value = bachelier(cset.shifted_forwards[0], product.strike, cset.sigmas[0], product.omega)
        return PricingResult.from_per_annuity(value, cset.annuities[0], "integral", sigma=float(cset.sigmas[0]))
    canary = CanarySwaption(*product.exercises, product.end, product.strike, product.omega)
    inputs, a2 = CanaryInputs.from_coterminal(cset)
    return price_canary_integral(canary, inputs, a2, points=pts, width=width)


def sweep_offsets(lo: float, hi: float, step: float) -> list[float]:
    """``lo, lo + step, ..., hi`` with ``round((hi - lo) / step) + 1`` points."""
    if not step > 0.0:
        raise DomainError("sweep step must be positive")
    if hi < lo:
        raise DomainError("sweep upper bound must not be below the lower bound")
    count = int(round((hi - lo) / step)) + 1
    # rounding to 12 decimals keeps the offsets free of accumulated float noise
    return [round(lo + k * step, 12) for k in range(count)]
