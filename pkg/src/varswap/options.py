"""Switches for the places where the model equations admit two readings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .errors import ValidationError

_CHOICES = {
    "mode": ("partial", "full"),
    "nesting": ("absolute", "paper_literal"),
    "gamma_convention": ("printed", "corrected"),
    "b_convention": ("shifted", "printed"),
    "d_quadratic_coefficient": ("eta2", "eta_printed"),
    "x_drift_sign": ("derived", "printed"),
}


@dataclass(frozen=True)
class Conventions:
    """
    mode: ``partial`` (only price/variance correlated) or ``full``.
    nesting: ``absolute`` solves each leg on its true calendar window so the
        bond coefficient B(t,T) is read at the right time; ``paper_literal``
        reuses the tau-clock windows [0, dt] and [0, t_{i-1}].
    gamma_convention: HJB constant Gamma with e^{vartheta x} (``printed``) or
        e^{-vartheta x} (``corrected``) in its middle integrand.
    b_convention: intercept of the sqrt-mean fit, ``shifted`` b = sqrt(V0) - a
        or ``printed`` b = sqrt(V0 - a).
    d_quadratic_coefficient: eta^2/2 (``eta2``) or eta/2 (``eta_printed``) on D^2.
    x_drift_sign: sign of the rho13 * eta * omega * E(t) * B term in the
        full-correlation E equation; ``derived`` (-) follows from the forward
        drift of the log-price, ``printed`` (+) flips it.
    """

    mode: Literal["partial", "full"] = "partial"
    nesting: Literal["absolute", "paper_literal"] = "absolute"
    gamma_convention: Literal["printed", "corrected"] = "printed"
    b_convention: Literal["shifted", "printed"] = "shifted"
    d_quadratic_coefficient: Literal["eta2", "eta_printed"] = "eta2"
    x_drift_sign: Literal["derived", "printed"] = "derived"

    def __post_init__(self):
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ValidationError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")

    def d_quadratic(self, eta: float) -> float:
        return 0.5 * eta * eta if self.d_quadratic_coefficient == "eta2" else 0.5 * eta
