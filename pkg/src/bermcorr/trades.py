"""Trade records and the trades.json loader.

A trades file is either a JSON list of trade objects or ``{"trades": [...]}``.
Every object carries an ``id``, a ``kind`` and the kind's terms::

    european        expiry, end, strike, omega
    relative_strike fix_time, start, end, spread, omega, vol_spread_mult
    midcurve        expiry, start, end, strike, omega
    canary          t1, t2, end, strike, omega
    bermudan        exercises, end, strike, omega

``strike`` may be a number or ``"atm"``; ``frequency`` (fixed payments per
year, default 1) is accepted by every kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .bermudan import BermudanSwaption
from .canary import CanarySwaption
from .errors import DomainError, InputFormatError
from .market import DiscountCurve, SwapSpec, par_rate
from .midcurve import MidcurveSwaption
from .relstrike import RelativeStrikeSwaption

_TERMS = {
    "european": ("expiry", "end", "strike"),
    "relative_strike": ("fix_time", "start", "end", "spread"),
    "midcurve": ("expiry", "start", "end", "strike"),
    "canary": ("t1", "t2", "end", "strike"),
    "bermudan": ("exercises", "end", "strike"),
}
_OPTIONAL = {"omega", "frequency", "vol_spread_mult"}

KINDS = tuple(_TERMS)


@dataclass(frozen=True)
class Trade:
    id: str
    kind: str
    terms: tuple

    def __post_init__(self):
        if self.kind not in _TERMS:
            raise DomainError(f"unknown trade kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        terms = dict(self.terms)
        missing = [k for k in _TERMS[self.kind] if k not in terms]
        if missing:
            raise DomainError(f"trade {self.id}: missing {', '.join(missing)}")
        extra = set(terms) - set(_TERMS[self.kind]) - _OPTIONAL
        if extra:
            raise DomainError(f"trade {self.id}: unexpected fields {', '.join(sorted(extra))}")
        if self.kind == "bermudan":
            terms["exercises"] = tuple(terms["exercises"])
        object.__setattr__(self, "terms", tuple(sorted(terms.items())))

    @classmethod
    def from_dict(cls, payload: dict) -> "Trade":
        payload = dict(payload)
        try:
            tid, kind = str(payload.pop("id")), payload.pop("kind")
        except KeyError as exc:
            raise DomainError(f"trade record needs {exc.args[0]!r}") from None
        return cls(tid, kind, tuple(payload.items()))

    def to_dict(self) -> dict:
        out = {"id": self.id, "kind": self.kind}
        for k, v in self.terms:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def get(self, name, default=None):
        return dict(self.terms).get(name, default)

    @property
    def omega(self) -> int:
        return int(self.get("omega", 1))

    @property
    def frequency(self) -> int:
        return int(self.get("frequency", 1))

    def reference_swap(self) -> SwapSpec:
        """Swap whose par rate is the trade's ATM: the underlying, or the first coterminal."""
        t = dict(self.terms)
        f = self.frequency
        if self.kind == "european":
            return SwapSpec(t["expiry"], t["end"], f)
        if self.kind in ("midcurve", "relative_strike"):
            return SwapSpec(t["start"], t["end"], f)
        if self.kind == "canary":
            return SwapSpec(t["t1"], t["end"], f)
        return SwapSpec(t["exercises"][0], t["end"], f)

    def atm(self, curve: DiscountCurve) -> float:
        return par_rate(curve, self.reference_swap())

    def strike(self, curve: DiscountCurve, offset=None) -> float:
        """Absolute strike, or the spread for a relative-strike trade.

        ``offset`` overrides the stated strike with ``ATM + offset``; for a
        relative-strike trade the offset is the spread itself.
        """
        if self.kind == "relative_strike":
            return float(self.get("spread") if offset is None else offset)
        if offset is not None:
            return self.atm(curve) + float(offset)
        raw = self.get("strike")
        if isinstance(raw, str):
            if raw.strip().lower() != "atm":
                raise DomainError(f"trade {self.id}: strike must be a number or 'atm', got {raw!r}")
            return self.atm(curve)
        return float(raw)

    def product(self, curve: DiscountCurve, offset=None):
        """The pricer-facing contract with a resolved strike."""
        t = dict(self.terms)
        k = self.strike(curve, offset)
        f, w = self.frequency, self.omega
        if self.kind == "european":
            return BermudanSwaption((t["expiry"],), t["end"], k, w)
        if self.kind == "bermudan":
            return BermudanSwaption(tuple(t["exercises"]), t["end"], k, w)
        if self.kind == "canary":
            return CanarySwaption(t["t1"], t["t2"], t["end"], k, w)
        if self.kind == "midcurve":
            return MidcurveSwaption(t["expiry"], SwapSpec(t["start"], t["end"], f), k, w)
        return RelativeStrikeSwaption(
            t["fix_time"], SwapSpec(t["start"], t["end"], f), k, w, float(t.get("vol_spread_mult", 1.0))
        )


def load_trades(path) -> list[Trade]:
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if isinstance(payload, dict):
        payload = payload.get("trades", [])
    if not isinstance(payload, list):
        raise InputFormatError(f"{path}: expected a list of trades")
    trades, seen = [], set()
    for n, rec in enumerate(payload):
        try:
            if not isinstance(rec, dict):
                raise DomainError("trade record must be an object")
            trade = Trade.from_dict(rec)
        except (DomainError, TypeError, ValueError) as exc:
            raise InputFormatError(f"{path}: trade #{n}: {exc}") from exc
        if trade.id in seen:
            raise InputFormatError(f"{path}: duplicate trade id {trade.id!r}")
        seen.add(trade.id)
        trades.append(trade)
    return trades
