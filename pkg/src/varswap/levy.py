"""Variance-gamma jump kernel and the Levy integrals built on it.

Every analytic integral of the form ``int (e^{ux} - 1) nu(dx)`` is routed
through the closed-form exponent

    psi(u) = -(1/K) * log(1 - u*vG*K - u^2*sigmaG^2*K/2),

which sidesteps the 1/|x| singularity of the kernel. ``quadrature_oracle``
integrates against the kernel directly and exists to check those closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .errors import DomainError, NonConvergent, OutsideMomentDomain, ValidationError

GammaConvention = Literal["printed", "corrected"]


@dataclass(frozen=True)
class VGParams:
    """Variance-gamma process: Brownian motion with drift ``drift`` and
    volatility ``vol`` run on a gamma clock with variance rate ``rate``."""

    drift: float
    vol: float
    rate: float

    def __post_init__(self):
        for name in ("drift", "vol", "rate"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"VG {name} must be finite")
        if self.vol <= 0.0:
            raise ValidationError(f"VG vol must be > 0, got {self.vol}")
        if self.rate <= 0.0:
            raise ValidationError(f"VG rate must be > 0, got {self.rate}")
        if not exponent_defined(1.0, self):
            raise OutsideMomentDomain("VG exponent undefined at u=1; compensator does not exist")

    @property
    def g_plus(self) -> float:
        """Exponential decay rate of the kernel for positive jumps."""
        return 1.0 / (self._root() + 0.5 * self.drift * self.rate)

    @property
    def g_minus(self) -> float:
        """Exponential decay rate of the kernel for negative jumps."""
        return 1.0 / (self._root() - 0.5 * self.drift * self.rate)

    def _root(self) -> float:
        k = self.rate
        return math.sqrt(0.25 * self.drift**2 * k**2 + 0.5 * self.vol**2 * k)

    @property
    def second_moment_rate(self) -> float:
        """int x^2 nu(dx) = psi''(0) = vG^2 K + sigmaG^2."""
        return self.drift**2 * self.rate + self.vol**2


def exponent_defined(u: float, p: VGParams | None) -> bool:
    if p is None:
        return True
    return u * p.drift * p.rate + 0.5 * u * u * p.vol**2 * p.rate < 1.0


def moment_bounds(p: VGParams) -> tuple[float, float]:
    """Open interval of u on which psi(u) is finite."""
    a = 0.5 * p.vol**2 * p.rate
    b = p.drift * p.rate
    disc = math.sqrt(b * b + 4.0 * a)
    return ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a))


def kernel_density(x, p: VGParams):
    """Levy density nu(x) (intensity per year per unit jump size)."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise DomainError("VG kernel is not defined at x = 0")
    ax = np.abs(x)
    rate = np.where(x > 0.0, p.g_plus, p.g_minus)
    out = np.exp(-rate * ax) / (p.rate * ax)
    return out if out.ndim else float(out)


def char_exponent(u: float, p: VGParams | None) -> float:
    """psi(u) = int (e^{ux} - 1) nu(dx); zero when there are no jumps."""
    if p is None:
        return 0.0
    x = u * p.drift * p.rate + 0.5 * u * u * p.vol**2 * p.rate
    if not x < 1.0:
        lo, hi = moment_bounds(p)
        raise OutsideMomentDomain(f"u={u} outside VG moment domain ({lo:.6g}, {hi:.6g})")
    return -math.log1p(-x) / p.rate


def jump_term_J(omega: float, p: VGParams | None) -> float:
    """int [(e^{wx} - 1) - w(e^x - 1)] nu(dx): the compensated jump drift of
    the log-price MGF."""
    return char_exponent(omega, p) - omega * char_exponent(1.0, p)


def premium_jump_integral(vartheta: float, p: VGParams | None) -> float:
    """int (e^x - 1)(1 - e^{-vartheta x}) nu(dx)."""
    return char_exponent(1.0, p) - char_exponent(1.0 - vartheta, p) + char_exponent(-vartheta, p)


def hjb_gamma(vartheta: float, delta: float, p: VGParams | None,
              convention: GammaConvention = "printed") -> float:
    """Constant term Gamma of the HJB system.

    ``printed`` uses e^{vartheta x} in the middle integrand; ``corrected``
    uses e^{-vartheta x}.
    """
    if convention == "printed":
        middle = char_exponent(1.0 - vartheta, p) - char_exponent(vartheta, p)
    elif convention == "corrected":
        middle = char_exponent(1.0 - vartheta, p) - char_exponent(-vartheta, p)
    else:
        raise ValidationError(f"unknown gamma_convention {convention!r}")
    return -delta - (1.0 - vartheta) * middle + char_exponent(1.0 - vartheta, p)


def quadrature_oracle(f: Callable[[float], float], p: VGParams, *,
                      first_panel: float = 1e-8, ratio: float = 2.0,
                      epsabs: float = 1e-12, max_panels: int = 400) -> float:
    """Integrate f(x) nu(x) over the real line, split at 0.

    Each half-line is covered by [0, first_panel] followed by geometrically
    growing panels, stopping once |f nu| at the panel end drops below 1e-16
    of the largest value seen. f must be O(x) near 0 for integrability.
    """

    def half_line(sign: float) -> float:
        decay = p.g_plus if sign > 0 else p.g_minus

        def g(y: float) -> float:
            x = sign * y
            return f(x) * math.exp(-decay * y) / (p.rate * y)

        total, _ = integrate.quad(g, 0.0, first_panel, epsabs=epsabs * 1e-3, epsrel=1e-12, limit=200)
        peak = abs(g(first_panel))
        a = first_panel
        for _ in range(max_panels):
            b = a * ratio
            val, _ = integrate.quad(g, a, b, epsabs=epsabs * 1e-3, epsrel=1e-12, limit=200)
            total += val
            end = abs(g(b))
            peak = max(peak, end)
            # far tail: exponential decay dominates any admissible f
            if b * decay > 50.0 and end <= 1e-16 * peak:
                return total
            a = b
        raise NonConvergent(f"quadrature did not reach the tail within {max_panels} panels")

    return half_line(1.0) + half_line(-1.0)
