"""Coterminal swap-rate data shared by the Canary and Bermudan pricers.

Exercise ``i`` enters the coterminal swap ``S(T_i, T_e)`` whose rate
``X_i = R(T_i, T_i, T_e)`` is Gaussian with absolute vol ``sigma_i``. A pair
``i < j`` is bridged by the short rate ``Y = R(T_i, T_i, T_j)`` and by the
midcurve rate ``Z = R(T_i, T_j, T_e)``, both fixed at ``T_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateDistributionError, DomainError, MarketDataError, ModelError
from .market import DiscountCurve, SwapSpec, annuity, par_rate
from .volsurface import CorrelationConfig, VolSurface, midcurve_vol_approx


def z_correlation(a_ie, a_ij, sigma_i, sigma_ij, rho_iy) -> float:
    """Correlation of ``X_i`` with the midcurve rate ``Z`` given the long/short correlation."""
    num = a_ie * sigma_i - a_ij * rho_iy * sigma_ij
    var = (a_ie * sigma_i) ** 2 - 2.0 * a_ie * a_ij * rho_iy * sigma_i * sigma_ij + (a_ij * sigma_ij) ** 2
    if var <= 0.0:
        raise DegenerateDistributionError(
            "midcurve rate has zero variance; its correlation with the long rate is undefined"
        )
    return float(np.clip(num / math.sqrt(var), -1.0, 1.0))


def triangle_correlation(a_ie, a_je, a_ij, sigma_i, sigma_j, sigma_ij) -> float:
    """Correlation of ``X_i`` and ``X_j`` implied by the decomposition
    ``A_je X_j = A_ie X_i - A_ij Y`` when the three vols are known."""
    den = 2.0 * a_ie * a_je * sigma_i * sigma_j
    if den <= 0.0:
        raise DegenerateDistributionError("zero vol in coterminal correlation")
    num = (a_ie * sigma_i) ** 2 + (a_je * sigma_j) ** 2 - (a_ij * sigma_ij) ** 2
    return float(np.clip(num / den, -1.0, 1.0))


@dataclass(frozen=True)
class Bridge:
    """Data linking exercises ``i < j``; vols are absolute to ``T_i``."""

    annuity: float
    sigma: Optional[float] = None
    rho_long_short: Optional[float] = None
    sigma_z: Optional[float] = None
    rho_forward: Optional[float] = None

    def __post_init__(self):
        if not self.annuity > 0.0:
            raise DomainError("bridge annuity must be positive")
        for name in ("rho_long_short", "rho_forward"):
            r = getattr(self, name)
            if r is not None and not -1.0 <= r <= 1.0:
                raise DomainError(f"{name} must lie in [-1, 1], got {r}")


@dataclass(frozen=True)
class CoterminalSet:
    """Per-exercise annuities ``A(t, T_i, T_e)``, forwards, absolute vols and shifts."""

    times: tuple
    end: float
    annuities: np.ndarray
    forwards: np.ndarray
    sigmas: np.ndarray
    shifts: np.ndarray = None
    bridges: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("annuities", "forwards", "sigmas"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise DomainError(f"{name} must have one entry per exercise")
            object.__setattr__(self, name, arr)
        shifts = np.zeros(n) if self.shifts is None else np.asarray(self.shifts, dtype=float)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if n == 0:
            raise DomainError("a coterminal set needs at least one exercise")
        if any(b <= a for a, b in zip(self.times, self.times[1:])) or self.times[-1] >= self.end:
            raise DomainError("exercise times must be strictly increasing and before the end")
        if np.any(self.annuities <= 0.0):
            raise DomainError("annuities must be positive")
        if np.any(self.sigmas < 0.0):
            raise DomainError("vols must be non-negative")

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def weights(self) -> np.ndarray:
        """Exercise-value weights ``A(t, T_i, T_e) / A(t, T_n, T_e)``."""
        return self.annuities / self.annuities[-1]

    @property
    def shifted_forwards(self) -> np.ndarray:
        return self.forwards + self.sigmas**2 * self.shifts

    def bridge(self, i, j) -> Bridge:
        try:
            return self.bridges[(i, j)]
        except KeyError:
            raise MarketDataError(
                f"no bridge data between exercises {self.times[i]} and {self.times[j]}"
            ) from None

    def sigma_z(self, i, j) -> float:
        """Absolute vol to ``T_i`` of the midcurve rate ``R(T_i, T_j, T_e)``."""
        br = self.bridge(i, j)
        if br.sigma_z is not None:
            return br.sigma_z
        if br.sigma is None or br.rho_long_short is None:
            raise MarketDataError(
                f"need the short-rate vol and long/short correlation for ({self.times[i]}, {self.times[j]})"
            )
        return midcurve_vol_approx(
            self.annuities[i], br.annuity, self.annuities[j],
            self.sigmas[i], br.sigma, br.rho_long_short,
        )

    def corr_xi_z(self, i, j) -> float:
        """Correlation between ``X_i`` and the midcurve rate ``R(T_i, T_j, T_e)``."""
        br = self.bridge(i, j)
        if br.sigma is not None and br.rho_long_short is not None:
            return z_correlation(self.annuities[i], br.annuity, self.sigmas[i], br.sigma, br.rho_long_short)
        if br.sigma is not None and br.sigma_z is not None:
            return triangle_correlation(
                self.annuities[i], self.annuities[j], br.annuity,
                self.sigmas[i], br.sigma_z, br.sigma,
            )
        raise MarketDataError(
            f"cannot correlate X_{i} with the midcurve rate: bridge ({self.times[i]}, {self.times[j]}) "
            "needs a short-rate vol plus either a long/short correlation or a midcurve vol"
        )

    def rho_forward(self, i, j) -> float:
        """Correlation of ``X_j`` with its conditional mean at ``T_i``."""
        br = self.bridge(i, j)
        if br.rho_forward is not None:
            return br.rho_forward
        sigma_j = self.sigmas[j]
        if sigma_j == 0.0:
            raise DegenerateDistributionError(f"X_{j} has zero vol")
        sz = self.sigma_z(i, j)
        if sz > sigma_j * (1.0 + 1e-12):
            raise ModelError(
                f"negative forward variance between {self.times[i]} and {self.times[j]}: "
                f"midcurve vol {sz:.6g} exceeds coterminal vol {sigma_j:.6g}"
            )
        return min(sz / sigma_j, 1.0)

    @classmethod
    def from_market(
        cls,
        exercises,
        end,
        strike,
        curve: DiscountCurve,
        surface: VolSurface,
        corr: CorrelationConfig,
        frequency: int = 1,
        pairs: str = "all",
    ) -> "CoterminalSet":
        """Read coterminal data off a curve, vol surface and correlation config.

        Smiles are read at the absolute ``strike`` for every leg. Bridges are
        built for all pairs (``pairs="all"``) or consecutive ones only; vols
        and correlations missing from the inputs are left as ``None`` and
        only reported when a pricer needs them.
        """
        times = [float(t) for t in exercises]
        specs = [SwapSpec(t, end, frequency) for t in times]
        ann = np.array([annuity(curve, s) for s in specs])
        fwd = np.array([par_rate(curve, s) for s in specs])
        sig = np.array([
            surface.vol(t, t, end, strike, f) * math.sqrt(t) for t, f in zip(times, fwd)
        ])
        shifts = np.array([corr.shift(t) for t in times])
        if pairs not in ("all", "adjacent"):
            raise DomainError(f"pairs must be 'all' or 'adjacent', got {pairs!r}")
        bridges = {}
        for i, ti in enumerate(times):
            js = range(i + 1, len(times)) if pairs == "all" else range(i + 1, min(i + 2, len(times)))
            for j in js:
                tj = times[j]
                short = SwapSpec(ti, tj, frequency)
                sigma = None
                if (ti, ti, tj) in surface:
                    sigma = surface.vol(ti, ti, tj, strike, par_rate(curve, short)) * math.sqrt(ti)
                rho_ls = corr.long_short_corr(ti, tj) if corr.has_long_short(ti, tj) else None
                bridges[(i, j)] = Bridge(
                    annuity=annuity(curve, short),
                    sigma=sigma,
                    rho_long_short=rho_ls,
                    rho_forward=corr.forward_fix_corr(ti, tj, end),
                )
        return cls(tuple(times), float(end), ann, fwd, sig, shifts, bridges)
