"""Discount curve, swap schedules, annuities and forward par rates.

Time is measured in years from the valuation date; there are no calendars or
day counts. Fixed legs pay ``1 / fixed_frequency`` at each payment date.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InputFormatError

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class DiscountCurve:
    """Zero-rate curve interpolated linearly in log discount factor.

    Parameters
    ----------
    pillars : sequence of (time, zero_rate)
        Strictly increasing times in years with continuously compounded
        zero rates. Zero rates are extrapolated flat on both sides.
    """

    pillars: tuple[tuple[float, float], ...]
    valuation_time: float = 0.0

    def __post_init__(self):
        pillars = tuple((float(t), float(z)) for t, z in self.pillars)
        if not pillars:
            raise DomainError("a discount curve needs at least one pillar")
        times = [t for t, _ in pillars]
        if times[0] < 0.0:
            raise DomainError(f"pillar times must be >= 0, got {times[0]}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("pillar times must be strictly increasing")
        if not all(math.isfinite(z) for _, z in pillars):
            raise DomainError("zero rates must be finite")
        object.__setattr__(self, "pillars", pillars)

    @classmethod
    def flat(cls, rate: float) -> "DiscountCurve":
        return cls(((1.0, rate),))

    @classmethod
    def from_json(cls, path) -> "DiscountCurve":
        text = Path(path).read_text()
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        try:
            return cls(tuple(tuple(p) for p in payload["pillars"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"{path}: bad market file ({exc})") from exc

    def _log_df_nodes(self):
        times = np.array([t for t, _ in self.pillars])
        log_df = -np.array([z * t for t, z in self.pillars])
        if times[0] > 0.0:
            # anchor at t=0 gives flat zero-rate extrapolation before the first pillar
            times = np.concatenate(([0.0], times))
            log_df = np.concatenate(([0.0], log_df))
        return times, log_df

    def discount_factor(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0.0):
            raise DomainError(f"discount factor requested at negative time {t}")
        times, log_df = self._log_df_nodes()
        inside = np.interp(t_arr, times, log_df)
        z_last = self.pillars[-1][1]
        out = np.where(t_arr > times[-1], -z_last * t_arr, inside)
        out = np.exp(out)
        return float(out) if out.ndim == 0 else out

    __call__ = discount_factor


def discount_factor(curve: DiscountCurve, t):
    """Discount factor ``exp(-z(t) t)`` for time(s) ``t >= 0``."""
    return curve.discount_factor(t)


@dataclass(frozen=True)
class SwapSpec:
    """Fixed leg schedule of a (possibly forward starting) swap."""

    start: float
    end: float
    fixed_frequency: int = 1

    def __post_init__(self):
        if self.fixed_frequency < 1 or int(self.fixed_frequency) != self.fixed_frequency:
            raise DomainError(f"fixed_frequency must be an integer >= 1, got {self.fixed_frequency}")
        if not 0.0 <= self.start < self.end:
            raise DomainError(f"need 0 <= start < end, got start={self.start}, end={self.end}")
        n = (self.end - self.start) * self.fixed_frequency
        if abs(n - round(n)) > _TIME_TOL or round(n) < 1:
            raise DomainError(
                f"(end - start) * frequency must be a positive integer, got {n}"
            )

    @property
    def n_periods(self) -> int:
        return int(round((self.end - self.start) * self.fixed_frequency))

    def payment_times(self) -> np.ndarray:
        k = np.arange(1, self.n_periods + 1)
        return self.start + k / self.fixed_frequency

    def accruals(self) -> np.ndarray:
        return np.full(self.n_periods, 1.0 / self.fixed_frequency)


def annuity(curve: DiscountCurve, spec: SwapSpec) -> float:
    """Sum of accrual times discount factor over the fixed-leg payment dates."""
    dfs = curve.discount_factor(spec.payment_times())
    return float(np.sum(spec.accruals() * np.atleast_1d(dfs)))


def par_rate(curve: DiscountCurve, spec: SwapSpec) -> float:
    """Forward par swap rate ``(df(start) - df(end)) / annuity``."""
    return (curve(spec.start) - curve(spec.end)) / annuity(curve, spec)


def midcurve_decomposition(curve: DiscountCurve, expiry: float, spec: SwapSpec) -> float:
    """Forward rate of ``spec`` rebuilt from the long and short swaps starting at ``expiry``.

    Returns ``[A_long R_long - A_short R_short] / A_fwd``; equals
    ``par_rate(curve, spec)`` identically. With ``expiry == spec.start`` the
    short swap is empty and the long swap is ``spec`` itself.
    """
    long = SwapSpec(expiry, spec.end, spec.fixed_frequency)
    a_fwd = annuity(curve, spec)
    value = annuity(curve, long) * par_rate(curve, long)
    if spec.start - expiry > _TIME_TOL:
        short = SwapSpec(expiry, spec.start, spec.fixed_frequency)
        value -= annuity(curve, short) * par_rate(curve, short)
    return value / a_fwd
