"""Normal volatility surface, correlation configuration and midcurve vols."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, InputFormatError, MarketDataError, ModelError

_KEY_DIGITS = 9


def _key(*times) -> tuple:
    return tuple(round(float(t), _KEY_DIGITS) for t in times)


@dataclass(frozen=True)
class Smile:
    offsets: tuple[float, ...]
    vols: tuple[float, ...]

    def __post_init__(self):
        if len(self.offsets) == 0 or len(self.offsets) != len(self.vols):
            raise DomainError("a smile needs matching, non-empty offsets and vols")
        if any(v <= 0.0 for v in self.vols):
            raise DomainError("normal vols must be positive")
        if any(b <= a for a, b in zip(self.offsets, self.offsets[1:])):
            raise DomainError("smile offsets must be strictly increasing")

    def __call__(self, offset: float) -> float:
        # np.interp extrapolates flat, which is what the wings need
        return float(np.interp(offset, self.offsets, self.vols))


@dataclass(frozen=True)
class VolSurface:
    """Per-annum normal vols keyed by ``(expiry, start, end)`` with a strike-offset smile."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        normalised = {}
        for k, smile in self.entries.items():
            if isinstance(smile, (int, float)):
                smile = Smile((0.0,), (float(smile),))
            elif not isinstance(smile, Smile):
                offsets, vols = zip(*sorted(smile))
                smile = Smile(tuple(offsets), tuple(vols))
            normalised[_key(*k)] = smile
        object.__setattr__(self, "entries", normalised)

    @classmethod
    def flat(cls, keys, vol: float) -> "VolSurface":
        return cls({k: vol for k in keys})

    def __contains__(self, key) -> bool:
        return _key(*key) in self.entries

    def smile(self, expiry, start, end) -> Smile:
        try:
            return self.entries[_key(expiry, start, end)]
        except KeyError:
            raise MarketDataError(
                f"no volatility for (expiry={expiry}, start={start}, end={end})"
            ) from None

    def vol(self, expiry, start, end, strike, atm) -> float:
        return self.smile(expiry, start, end)(strike - atm)

    @classmethod
    def from_csv(cls, path) -> "VolSurface":
        rows: dict = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            need = {"expiry", "start", "end", "strike_offset", "normal_vol"}
            if reader.fieldnames is None or not need.issubset(reader.fieldnames):
                raise InputFormatError(f"{path}:1: header must contain {sorted(need)}")
            for row in reader:
                try:
                    k = _key(row["expiry"], row["start"], row["end"])
                    rows.setdefault(k, []).append(
                        (float(row["strike_offset"]), float(row["normal_vol"]))
                    )
                except (TypeError, ValueError) as exc:
                    raise InputFormatError(f"{path}:{reader.line_num}: {exc}") from exc
        try:
            return cls(rows)
        except DomainError as exc:
            raise InputFormatError(f"{path}: {exc}") from exc


def lookup_vol(surface: VolSurface, expiry, start, end, strike, atm) -> float:
    """Per-annum normal vol, linear in ``strike - atm`` and flat beyond the wings."""
    return surface.vol(expiry, start, end, strike, atm)


@dataclass(frozen=True)
class CorrelationConfig:
    """Rate correlations and convexity shifts.

    ``long_short`` maps ``(T_i, T_j)`` to the correlation between the long rate
    ``R(T_i, T_i, T_e)`` and the short rate ``R(T_i, T_i, T_j)``, both fixed at
    ``T_i``. ``forward_fix`` optionally overrides the correlation between a
    rate fixed at ``T_fix`` and the same forward rate fixed at its start.
    ``convexity_shifts`` maps a fixing time to the shift parameter of the
    coterminal (long) rate fixed then; ``rate_shifts`` maps
    ``(T_fix, T_s, T_e)`` to the shift of any other rate.
    """

    long_short: dict = field(default_factory=dict)
    forward_fix: dict = field(default_factory=dict)
    convexity_shifts: dict = field(default_factory=dict)
    rate_shifts: dict = field(default_factory=dict)

    def __post_init__(self):
        ls = {_key(*k): float(v) for k, v in self.long_short.items()}
        ff = {_key(*k): float(v) for k, v in self.forward_fix.items()}
        cs = {_key(k)[0]: float(v) for k, v in self.convexity_shifts.items()}
        rs = {_key(*k): float(v) for k, v in self.rate_shifts.items()}
        for name, table in (("long_short", ls), ("forward_fix", ff)):
            for k, v in table.items():
                if not -1.0 <= v <= 1.0:
                    raise DomainError(f"{name} correlation {k} = {v} outside [-1, 1]")
        object.__setattr__(self, "long_short", ls)
        object.__setattr__(self, "forward_fix", ff)
        object.__setattr__(self, "convexity_shifts", cs)
        object.__setattr__(self, "rate_shifts", rs)

    def long_short_corr(self, t_i, t_j) -> float:
        try:
            return self.long_short[_key(t_i, t_j)]
        except KeyError:
            raise MarketDataError(f"no long/short correlation for ({t_i}, {t_j})") from None

    def has_long_short(self, t_i, t_j) -> bool:
        return _key(t_i, t_j) in self.long_short

    def forward_fix_corr(self, t_fix, start, end):
        return self.forward_fix.get(_key(t_fix, start, end))

    def shift(self, t) -> float:
        return self.convexity_shifts.get(_key(t)[0], 0.0)

    def rate_shift(self, t_fix, start, end) -> float:
        return self.rate_shifts.get(_key(t_fix, start, end), 0.0)

    @classmethod
    def from_json(cls, path) -> "CorrelationConfig":
        text = Path(path).read_text()
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        try:
            shifts = payload.get("convexity_shifts", [])
            if any(len(row) not in (2, 4) for row in shifts):
                raise ValueError("convexity_shifts rows are [T, delta] or [T_fix, T_s, T_e, delta]")
            return cls(
                long_short={(a, b): r for a, b, r in payload.get("long_short", [])},
                forward_fix={(a, b, c): r for a, b, c, r in payload.get("forward_fix", [])},
                convexity_shifts={row[0]: row[1] for row in shifts if len(row) == 2},
                rate_shifts={tuple(row[:3]): row[3] for row in shifts if len(row) == 4},
            )
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"{path}: bad correlation file ({exc})") from exc


def midcurve_vol_approx(a_long, a_short, a_fwd, sigma_e, sigma_s, rho_se) -> float:
    """Normal vol of a forward-starting rate from its long and short legs.

    ``sigma^2 = (A_l/A)^2 s_e^2 - 2 (A_l/A)(A_s/A) rho s_e s_s + (A_s/A)^2 s_s^2``
    with ``A_l``, ``A_s``, ``A`` the long, short and forward annuities. Works
    for per-annum and absolute vols alike, as long as both legs share one.
    """
    if a_long <= 0.0 or a_fwd <= 0.0 or a_short < 0.0:
        raise DomainError("annuities must be positive")
    if not -1.0 <= rho_se <= 1.0:
        raise DomainError(f"long/short correlation must lie in [-1, 1], got {rho_se}")
    a = a_long / a_fwd
    b = a_short / a_fwd
    t_long = (a * sigma_e) ** 2
    t_cross = 2.0 * a * b * rho_se * sigma_e * sigma_s
    t_short = (b * sigma_s) ** 2
    var = t_long - t_cross + t_short
    if var < -1e-12 * (t_long + t_cross + t_short):
        raise ModelError(
            f"negative midcurve variance: long term {t_long:.6g}, cross term "
            f"{-t_cross:.6g}, short term {t_short:.6g}"
        )
    return math.sqrt(max(var, 0.0))


def apply_convexity_shift(mean, sigma, delta):
    """Mean of the exponentially tilted Gaussian: ``mean + sigma^2 delta``."""
    return mean + sigma * sigma * delta
