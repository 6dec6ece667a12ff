"""scikit-learn style front end: ``fit`` on market data, ``predict`` present values."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .analytics import DEFAULT_POINTS, DEFAULT_WIDTH
from .engine import MODELS, MarketData, PricingSettings, price_trade
from .errors import DomainError
from .oracle import McSpec
from .trades import Trade


def check_market(market) -> MarketData:
    """Accept a :class:`MarketData` or a ``(curve, surface, corr)`` triple."""
    if isinstance(market, MarketData):
        return market
    try:
        curve, surface, corr = market
    except (TypeError, ValueError):
        raise DomainError("market must be MarketData or a (curve, surface, corr) triple") from None
    return MarketData(curve, surface, corr)


def check_trades(trades) -> list[Trade]:
    """Normalise a trade, a trade dict or a sequence of either into a list of trades."""
    if isinstance(trades, (Trade, dict)):
        trades = [trades]
    out = []
    for t in trades:
        out.append(t if isinstance(t, Trade) else Trade.from_dict(t))
    return out


class SwaptionPricer(BaseEstimator):
    """Prices swaption trades against a fitted market.

    Parameters
    ----------
    model : {"integral", "mm", "lattice", "mc"}
    points : int
        Simpson nodes per panel for the quadrature models.
    width : float
        Integration half-width in standard deviations.
    paths, seed, antithetic
        Monte Carlo settings, used by ``model="mc"`` only.

    Examples
    --------
    >>> pricer = SwaptionPricer(model="lattice").fit(market)     # doctest: +SKIP
    >>> pricer.predict([{"id": "b", "kind": "bermudan", "exercises": [1, 2],
    ...                  "end": 5, "strike": "atm"}])            # doctest: +SKIP
    """

    def __init__(self, model="integral", points=DEFAULT_POINTS, width=DEFAULT_WIDTH,
                 paths=100_000, seed=0, antithetic=True):
        self.model = model
        self.points = points
        self.width = width
        self.paths = paths
        self.seed = seed
        self.antithetic = antithetic

    def fit(self, market, y=None):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        self.market_ = check_market(market)
        self.settings_ = PricingSettings(
            self.points, self.width, McSpec(self.paths, self.seed, self.antithetic)
        )
        return self

    def price(self, trades, offset=None) -> list:
        """Full :class:`~bermcorr.results.PricingResult` per trade."""
        check_is_fitted(self, "market_")
        return [price_trade(t, self.market_, self.model, self.settings_, offset) for t in check_trades(trades)]

    def predict(self, trades, offset=None) -> np.ndarray:
        """Present values, one per trade."""
        return np.array([r.pv for r in self.price(trades, offset)])
