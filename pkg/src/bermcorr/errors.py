"""Exception hierarchy shared by the pricers and the CLI."""


class BermcorrError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BermcorrError, ValueError):
    """An argument lies outside the domain of a function."""


class ModelError(BermcorrError):
    """Inputs are individually valid but jointly inconsistent with the model.

    Typical cause: a negative forward variance or a negative basket variance.
    """


class DegenerateDistributionError(ModelError):
    """A correlation is undefined because a distribution collapsed to a point."""


class MarketDataError(BermcorrError, KeyError):
    """A volatility, correlation or curve entry required by a trade is missing."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class GridError(BermcorrError):
    """Quadrature or lattice grid is too narrow for the requested accuracy."""


class InputFormatError(BermcorrError):
    """An input file could not be parsed."""
