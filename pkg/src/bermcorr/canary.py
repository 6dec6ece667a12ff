"""Canary swaptions: Bermudans with exactly two exercise dates.

Both pricers work in the annuity measure of the second coterminal swap. The
integral pricer averages ``max(w1 * exercise value at T_1, option on the
second coterminal)`` over the joint law of the first coterminal rate and the
midcurve rate ``Z = R(T_1, T_2, T_e)``; the second leg is a Bachelier option
on the residual (forward) vol. The moment-matching pricer replaces the pair
by two correlated normals and takes a Gaussian-matched maximum with zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import (
    DEFAULT_POINTS,
    DEFAULT_WIDTH,
    NormalLaw,
    bachelier,
    bisect_crossing,
    clark_max,
    gaussian_expectation_2d,
)
from .coterminal import CoterminalSet, triangle_correlation, z_correlation
from .errors import DomainError, ModelError
from .results import PricingResult


@dataclass(frozen=True)
class CanarySwaption:
    t1: float
    t2: float
    end: float
    strike: float
    omega: int = 1

    def __post_init__(self):
        if not 0.0 < self.t1 < self.t2 < self.end:
            raise DomainError(f"need 0 < t1 < t2 < end, got {self.t1}, {self.t2}, {self.end}")
        if self.omega not in (1, -1):
            raise DomainError(f"omega must be +1 or -1, got {self.omega}")


@dataclass(frozen=True)
class CanaryInputs:
    """Gaussian inputs; every vol is absolute (includes the square-root-time factor).

    ``sigma_1e`` is the vol of ``X_1`` to ``T_1``, ``sigma_x2`` of ``X_2`` to
    ``T_2``, ``sigma_z`` of the midcurve rate to ``T_1`` and ``sigma_12`` of
    the short rate ``R(T_1, T_1, T_2)`` to ``T_1``. ``w1`` is
    ``A(t, T_1, T_e) / A(t, T_2, T_e)``.
    """

    mu1: float
    mu2: float
    sigma_1e: float
    sigma_x2: float
    sigma_z: float
    sigma_12: float
    rho_2e: float
    w1: float
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        for name in ("sigma_1e", "sigma_x2", "sigma_z", "sigma_12"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be non-negative")
        if not self.w1 > 0.0:
            raise DomainError("w1 must be positive")
        if not -1.0 <= self.rho_2e <= 1.0:
            raise DomainError(f"rho_2e must lie in [-1, 1], got {self.rho_2e}")
        if self.sigma_z > self.sigma_x2 * (1.0 + 1e-12):
            raise ModelError(
                f"negative forward variance: sigma_z={self.sigma_z} > sigma_x2={self.sigma_x2}"
            )

    @property
    def forward_vol(self) -> float:
        return math.sqrt(max(self.sigma_x2**2 - self.sigma_z**2, 0.0))

    def annuities(self, annuity_2):
        """``(A_1e, A_12, A_2e)`` from the terminal annuity via ``A_1e = A_12 + A_2e``."""
        a_1e = self.w1 * annuity_2
        a_12 = a_1e - annuity_2
        if a_12 <= 0.0:
            raise DomainError("w1 must exceed 1 for the short annuity to be positive")
        return a_1e, a_12, annuity_2

    @classmethod
    def from_coterminal(cls, cset: CoterminalSet):
        """Inputs and ``A(t, T_2, T_e)`` for a two-exercise coterminal set."""
        if cset.n != 2:
            raise DomainError(f"a Canary needs exactly two exercises, got {cset.n}")
        br = cset.bridge(0, 1)
        sigma_x2 = float(cset.sigmas[1])
        sigma_z = br.rho_forward * sigma_x2 if br.rho_forward is not None else cset.sigma_z(0, 1)
        rho_2e = br.rho_long_short
        if rho_2e is None:
            # recover the long/short correlation from the triangle
            a_1e, a_2e, a_12 = cset.annuities[0], cset.annuities[1], br.annuity
            s1, s12 = cset.sigmas[0], br.sigma
            rho_2e = ((a_1e * s1) ** 2 + (a_12 * s12) ** 2 - (a_2e * cset.sigma_z(0, 1)) ** 2) / (
                2.0 * a_1e * a_12 * s1 * s12
            )
            rho_2e = float(np.clip(rho_2e, -1.0, 1.0))
        inputs = cls(
            mu1=float(cset.forwards[0]),
            mu2=float(cset.forwards[1]),
            sigma_1e=float(cset.sigmas[0]),
            sigma_x2=sigma_x2,
            sigma_z=float(sigma_z),
            sigma_12=float(br.sigma),
            rho_2e=float(rho_2e),
            w1=float(cset.weights[0]),
            delta1=float(cset.shifts[0]),
            delta2=float(cset.shifts[1]),
        )
        return inputs, float(cset.annuities[1])


def rho_x1_z(inputs: CanaryInputs, a_1e, a_12, a_2e=None) -> float:
    """Correlation between the first coterminal rate and the midcurve rate at ``T_1``."""
    return z_correlation(a_1e, a_12, inputs.sigma_1e, inputs.sigma_12, inputs.rho_2e)


def exercise_max_parts(weight, strike, omega, continuation, continuation_kink=None):
    """Integrand ``max(exercise, continuation)`` and its kink locator in the second variable.

    ``continuation`` must be monotone; the kink is where it crosses the
    exercise value, or ``continuation_kink`` when they never cross.
    """

    def payoff(x):
        return weight * np.maximum(omega * (x - strike), 0.0)

    def integrand(x, y):
        return np.maximum(payoff(x), continuation(y))

    def kink(x, lo, hi):
        ex = payoff(x)
        root = bisect_crossing(lambda y: continuation(y) - ex, lo, hi)
        if continuation_kink is not None:
            root = np.where(np.isnan(root), continuation_kink, root)
        return root

    return integrand, kink


def exercise_max_expectation(
    law_x: NormalLaw,
    law_next: NormalLaw,
    rho: float,
    weight: float,
    strike: float,
    omega: int,
    continuation,
    continuation_kink=None,
    points=DEFAULT_POINTS,
    width=DEFAULT_WIDTH,
) -> float:
    """``E[max(weight * (omega (X - K))^+, continuation(Y))]`` for bivariate normal ``(X, Y)``."""
    integrand, kink = exercise_max_parts(weight, strike, omega, continuation, continuation_kink)
    return gaussian_expectation_2d(
        integrand, law_x, law_next, rho, points, width, x_breaks=(strike,), y_break=kink
    )


def price_canary_integral(
    trade: CanarySwaption,
    inputs: CanaryInputs,
    annuity_2: float,
    rho_x1z=None,
    points=DEFAULT_POINTS,
    width=DEFAULT_WIDTH,
) -> PricingResult:
    if rho_x1z is None:
        rho_x1z = rho_x1_z(inputs, *inputs.annuities(annuity_2))
    if not -1.0 <= rho_x1z <= 1.0:
        raise DomainError(f"rho_x1z must lie in [-1, 1], got {rho_x1z}")
    K, omega = trade.strike, trade.omega
    s = inputs.forward_vol
    law_x = NormalLaw(inputs.mu1 + inputs.sigma_1e**2 * inputs.delta1, inputs.sigma_1e)
    law_z = NormalLaw(inputs.mu2 + inputs.sigma_x2**2 * inputs.delta2, inputs.sigma_z)
    value = exercise_max_expectation(
        law_x, law_z, rho_x1z, inputs.w1, K, omega,
        continuation=lambda z: bachelier(z, K, s, omega),
        continuation_kink=K if s == 0.0 else None,
        points=points, width=width,
    )
    return PricingResult.from_per_annuity(
        value, annuity_2, "integral",
        rho_x1z=rho_x1z, forward_vol=s, points=points, width=width,
    )


def price_canary_mm(
    trade: CanarySwaption,
    inputs: CanaryInputs,
    annuity_2: float,
    rho=None,
    order=None,
) -> PricingResult:
    """Moment-matched ``E[max(0, V_1, V_2)]`` under perfectly correlated forward rates.

    ``V_1 ~ N(w1 omega (mu1 - K), w1 sigma_1e)`` and ``V_2 ~ N(omega (mu2 - K), sigma_x2)``.
    The default correlation is the triangle form with ``sigma_x2`` standing in
    for the midcurve vol. The zero floor is folded in last unless ``order``
    says otherwise.
    """
    K, omega = trade.strike, trade.omega
    if rho is None:
        if inputs.sigma_1e == 0.0 or inputs.sigma_x2 == 0.0:
            rho = 1.0
        else:
            a_1e, a_12, a_2e = inputs.annuities(annuity_2)
            rho = triangle_correlation(a_1e, a_2e, a_12, inputs.sigma_1e, inputs.sigma_x2, inputs.sigma_12)
    mu1 = inputs.mu1 + inputs.sigma_1e**2 * inputs.delta1
    mu2 = inputs.mu2 + inputs.sigma_x2**2 * inputs.delta2
    means = [inputs.w1 * omega * (mu1 - K), omega * (mu2 - K), 0.0]
    stdevs = [inputs.w1 * inputs.sigma_1e, inputs.sigma_x2, 0.0]
    corr = np.array([[1.0, rho, 0.0], [rho, 1.0, 0.0], [0.0, 0.0, 1.0]])
    if order is None:
        order = [0, 1, 2] if means[0] >= means[1] else [1, 0, 2]
    law = clark_max(means, stdevs, corr, order=order)
    return PricingResult.from_per_annuity(
        law.mean, annuity_2, "mm",
        rho=float(rho), order=list(order), sigma_second=inputs.sigma_x2, sigma_12=inputs.sigma_12,
        note="second normal uses the coterminal-2 vol sigma_x2, not sigma_12",
    )
