from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class PricingResult:
    """Present value with its annuity normalisation.

    ``pv_per_annuity`` is the value in the annuity measure of the reference
    swap (the last coterminal for Bermudans, the underlying for single
    exercise trades) and ``pv == pv_per_annuity * annuity``.
    """

    pv: float
    pv_per_annuity: float
    annuity: float
    model: str
    std_error: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_per_annuity(cls, per_annuity, annuity, model, std_error=None, **diagnostics):
        per_annuity = float(per_annuity)
        se = None if std_error is None else float(std_error) * annuity
        return cls(per_annuity * annuity, per_annuity, float(annuity), model, se, diagnostics)
