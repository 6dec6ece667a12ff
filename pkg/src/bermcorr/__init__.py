"""Correlation-based semi-analytical pricing of Bermudan, Canary, midcurve and
relative-strike swaptions under Gaussian (normal) swap rates."""

from .analytics import bachelier, clark_max, validate_correlation_matrix
from .bermudan import (
    BermudanSwaption,
    correlation_matrix,
    coterminal_corr,
    price_bermudan_lattice,
    price_bermudan_mm,
)
from .canary import CanaryInputs, CanarySwaption, price_canary_integral, price_canary_mm
from .coterminal import CoterminalSet
from .engine import MarketData, PricingSettings, price_trade
from .errors import (
    BermcorrError,
    DegenerateDistributionError,
    DomainError,
    GridError,
    InputFormatError,
    MarketDataError,
    ModelError,
)
from .estimator import SwaptionPricer
from .market import DiscountCurve, SwapSpec, annuity, par_rate
from .midcurve import MidcurveSwaption, midcurve_inputs, price_midcurve
from .oracle import McResult, McSpec
from .relstrike import RelativeStrikeSwaption, fixing_correlation, price_relative_strike
from .results import PricingResult
from .trades import Trade, load_trades
from .volsurface import CorrelationConfig, VolSurface

__version__ = "0.1.0"

__all__ = [
    "BermcorrError", "BermudanSwaption", "CanaryInputs", "CanarySwaption", "CorrelationConfig",
    "CoterminalSet", "DegenerateDistributionError", "DiscountCurve", "DomainError", "GridError",
    "InputFormatError", "MarketData", "MarketDataError", "McResult", "McSpec", "MidcurveSwaption",
    "ModelError", "PricingResult", "PricingSettings", "RelativeStrikeSwaption", "SwapSpec",
    "SwaptionPricer", "Trade", "VolSurface", "annuity", "bachelier", "clark_max",
    "correlation_matrix", "coterminal_corr", "fixing_correlation", "load_trades",
    "midcurve_inputs", "par_rate", "price_bermudan_lattice", "price_bermudan_mm",
    "price_canary_integral", "price_canary_mm", "price_midcurve", "price_relative_strike",
    "price_trade", "validate_correlation_matrix",
]
