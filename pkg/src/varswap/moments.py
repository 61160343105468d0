"""Moments of sqrt of a square-root (CIR) process and the cross moment
E[sqrt(V_t) sqrt(r_t)] that closes the full-correlation E equation.

V_t / c(t) is noncentral chi-square with d degrees of freedom and
noncentrality lambda(t), where

    c(t) = sigma^2 (1 - e^{-kappa t}) / (4 kappa),  d = 4 kappa theta / sigma^2,
    lambda(t) = 4 kappa e^{-kappa t} V0 / (sigma^2 (1 - e^{-kappa t})).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import FitDomainError, NegativeRadicand, SeriesNonConvergent, ValidationError
from .options import Conventions
from .params import ForwardParams

SERIES_TOL = 1e-14
SERIES_CAP = 10_000


@dataclass(frozen=True)
class CirMomentSpec:
    kappa: float
    theta: float
    sigma: float
    x0: float

    def __post_init__(self):
        if not (self.kappa > 0.0 and self.theta > 0.0 and self.sigma > 0.0 and self.x0 > 0.0):
            raise ValidationError(f"CIR moment spec needs positive inputs, got {self}")

    @classmethod
    def variance(cls, p: ForwardParams) -> "CirMomentSpec":
        return cls(p.kappa, p.theta, p.sigma, p.V0)

    @classmethod
    def rate(cls, p: ForwardParams) -> "CirMomentSpec":
        return cls(p.alpha, p.beta, p.eta, p.r0)

    @property
    def d(self) -> float:
        return 4.0 * self.kappa * self.theta / self.sigma**2

    def c(self, t: float) -> float:
        return self.sigma**2 * -math.expm1(-self.kappa * t) / (4.0 * self.kappa)

    def lam(self, t: float) -> float:
        return 4.0 * self.kappa * math.exp(-self.kappa * t) * self.x0 / (
            self.sigma**2 * -math.expm1(-self.kappa * t))

    def mean(self, t: float) -> float:
        """E[V_t]."""
        return self.theta + (self.x0 - self.theta) * math.exp(-self.kappa * t)


def _poisson_series(lam: float, d: float) -> float:
    """sum_k Pois(k; lam/2) Gamma((1+d)/2 + k) / Gamma(d/2 + k), summed outward
    from the Poisson mode until terms drop below SERIES_TOL of the partial sum."""
    half = 0.5 * lam

    def term(k: int) -> float:
        logw = (k * math.log(half) - half - math.lgamma(k + 1.0)) if half > 0.0 else (0.0 if k == 0 else -math.inf)
        return math.exp(logw + gammaln(0.5 * (1.0 + d) + k) - gammaln(0.5 * d + k))

    mode = int(half)
    total = term(mode)
    used = 1
    up, down = mode + 1, mode - 1
    up_done, down_done = False, down < 0
    while not (up_done and down_done):
        if used >= SERIES_CAP:
            raise SeriesNonConvergent(f"series needs more than {SERIES_CAP} terms (lambda={lam:.3g})")
        if not up_done:
            t = term(up)
            total += t
            used += 1
            up += 1
            up_done = t < SERIES_TOL * total
        if not down_done:
            t = term(down)
            total += t
            used += 1
            down -= 1
            down_done = down < 0 or t < SERIES_TOL * total
    return total


def sqrt_expectation_exact(t: float, s: CirMomentSpec) -> float:
    """E[sqrt(V_t)] from the noncentral chi-square series.

    When the Poisson mass of the series is too wide for the term cap (very
    large lambda: small t or tiny sigma) the equivalent Kummer form
    sqrt(2c) Gamma((d+1)/2)/Gamma(d/2) 1F1(-1/2; d/2; -lambda/2) is used.
    """
    if not t > 0.0:
        raise ValidationError("t must be > 0")
    c, d, lam = s.c(t), s.d, s.lam(t)
    if 0.5 * lam < 2.0e5:
        return math.sqrt(2.0 * c) * _poisson_series(lam, d)
    return sqrt_expectation_kummer(t, s)


def sqrt_expectation_kummer(t: float, s: CirMomentSpec) -> float:
    c, d, lam = s.c(t), s.d, s.lam(t)
    ratio = math.exp(math.lgamma(0.5 * (d + 1.0)) - math.lgamma(0.5 * d))
    with mpmath.workdps(30):
        f = float(mpmath.hyp1f1(-0.5, 0.5 * d, -0.5 * lam))
    return math.sqrt(2.0 * c) * ratio * f


def sqrt_variance_exact(t: float, s: CirMomentSpec) -> float:
    """Var[sqrt(V_t)] = E[V_t] - E[sqrt(V_t)]^2."""
    m = sqrt_expectation_exact(t, s)
    return s.c(t) * (s.d + s.lam(t)) - m * m


def sqrt_expectation_omega1(t: float, s: CirMomentSpec) -> float:
    """Closed-form approximation sqrt(c(lambda - 1) + c d + c d / (2 (d + lambda)))."""
    if not t > 0.0:
        raise ValidationError("t must be > 0")
    c, d, lam = s.c(t), s.d, s.lam(t)
    rad = c * (lam - 1.0) + c * d + c * d / (2.0 * (d + lam))
    if rad < 0.0:
        raise NegativeRadicand(f"Omega1 radicand {rad:.3g} < 0 at t={t}")
    return math.sqrt(rad)


def sqrt_variance_approx(t: float, s: CirMomentSpec) -> float:
    """Psi(t) = c - c d / (2 (d + lambda)), the delta-method variance of sqrt(V_t)."""
    if t <= 0.0:
        return 0.0
    c, d, lam = s.c(t), s.d, s.lam(t)
    return c - c * d / (2.0 * (d + lam))


@dataclass(frozen=True)
class ExpFit:
    """Omega2(t) = a + b exp(-c t)."""

    a: float
    b: float
    c: float

    def __call__(self, t):
        out = self.a + self.b * np.exp(-self.c * np.asarray(t, dtype=float))
        return float(out) if np.ndim(out) == 0 else out


def fit_abc(s: CirMomentSpec, b_convention: str = "shifted") -> ExpFit:
    floor = s.sigma**2 / (8.0 * s.kappa)
    if s.theta <= floor:
        raise FitDomainError(f"fit needs theta > sigma^2/(8 kappa) ({s.theta:.6g} <= {floor:.6g})")
    a = math.sqrt(s.theta - floor)
    if b_convention == "shifted":
        b = math.sqrt(s.x0) - a
    elif b_convention == "printed":
        if s.x0 < a:
            raise FitDomainError(f"printed b = sqrt(V0 - a) needs V0 >= a ({s.x0:.6g} < {a:.6g})")
        b = math.sqrt(s.x0 - a)
    else:
        raise ValidationError(f"unknown b_convention {b_convention!r}")
    if abs(b) < 1e-12:
        raise FitDomainError("fit intercept b is zero; decay rate undetermined")
    ratio = (sqrt_expectation_omega1(1.0, s) - a) / b
    if ratio <= 0.0:
        raise FitDomainError(f"fit decay rate undefined: (Omega1(1) - a)/b = {ratio:.6g} <= 0")
    return ExpFit(a, b, -math.log(ratio))


def cross_moment(t: float, spec_v: CirMomentSpec, spec_r: CirMomentSpec,
                 sigma: float, eta: float, rho23: float,
                 fit_v: ExpFit | None = None, fit_r: ExpFit | None = None) -> float:
    """E[sqrt(V_t) sqrt(r_t)] ~ sigma eta rho23 / 4 * sqrt(Psi Psi~) + Omega2 Omega2~."""
    fit_v = fit_v or fit_abc(spec_v)
    fit_r = fit_r or fit_abc(spec_r)
    psi = sqrt_variance_approx(t, spec_v) * sqrt_variance_approx(t, spec_r)
    return 0.25 * sigma * eta * rho23 * math.sqrt(psi) + fit_v(t) * fit_r(t)


@dataclass(frozen=True)
class CrossMoment:
    """Callable t -> E[sqrt(V_t) sqrt(r_t)] with both fits computed once."""

    params: ForwardParams
    b_convention: str = "shifted"

    @classmethod
    def from_params(cls, p: ForwardParams, conv: Conventions = Conventions()) -> "CrossMoment":
        return cls(p, conv.b_convention)

    @cached_property
    def specs(self) -> tuple[CirMomentSpec, CirMomentSpec]:
        return CirMomentSpec.variance(self.params), CirMomentSpec.rate(self.params)

    @cached_property
    def fits(self) -> tuple[ExpFit, ExpFit]:
        sv, sr = self.specs
        return fit_abc(sv, self.b_convention), fit_abc(sr, self.b_convention)

    def __call__(self, t: float) -> float:
        sv, sr = self.specs
        fv, fr = self.fits
        p = self.params
        return cross_moment(max(t, 0.0), sv, sr, p.sigma, p.eta, p.rho23, fv, fr)
