"""Model parameters under the physical, risk-neutral and T-forward measures.

The three tiers are distinct frozen dataclasses so a pricer cannot silently
consume physical-measure inputs. ``validate`` enforces the Feller conditions,
correlation bounds and positive initial state; the measure maps
``to_risk_neutral`` and ``to_forward`` produce the next tier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Literal, TypeVar

from .errors import (
    CorrelationOutOfRange,
    DegenerateParameter,
    FellerViolation,
    NonPositiveInitialState,
    ValidationError,
)
from .levy import VGParams

Mode = Literal["partial", "full"]

PSD_TOL = 1e-12


@dataclass(frozen=True)
class _Diffusions:
    """Shared coefficients of the variance (kappa, theta, sigma) and short-rate
    (alpha, beta, eta) square-root processes, correlations and initial state.

    ``rho`` correlates log-price and variance shocks (rho12 in the full case);
    ``rho13`` and ``rho23`` are the price/rate and variance/rate correlations,
    used only in full-correlation mode.
    """

    kappa: float
    theta: float
    sigma: float
    alpha: float
    beta: float
    eta: float
    rho: float = 0.0
    rho13: float = 0.0
    rho23: float = 0.0
    S0: float = 1.0
    V0: float = 0.05
    r0: float = 0.05
    jumps: VGParams | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float | int) and not math.isfinite(v):
                raise ValidationError(f"{f.name} must be finite, got {v}")

    @property
    def rho12(self) -> float:
        return self.rho

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class PhysicalParams(_Diffusions):
    mu: float = 0.0


@dataclass(frozen=True)
class RiskNeutralParams(_Diffusions):
    pass


@dataclass(frozen=True)
class ForwardParams(_Diffusions):
    """Starred parameters under the T-forward measure. ``jumps`` is the
    forward-measure kernel; ``maturity`` is the bond maturity T."""

    maturity: float = 1.0


@dataclass(frozen=True)
class RiskPrices:
    lambda1: float = 0.0
    lambda2: float = 0.0
    vartheta: float = 2.0
    delta: float = 0.1
    I: float | None = None
    K: float | None = None
    M: float | None = None

    def __post_init__(self):
        if not self.vartheta > 0.0 or self.vartheta == 1.0:
            raise ValidationError(f"vartheta must be > 0 and != 1, got {self.vartheta}")
        if not self.delta > 0.0:
            raise ValidationError(f"delta must be > 0, got {self.delta}")


P = TypeVar("P", bound=_Diffusions)


def validate(p: P, *, feller: bool = True) -> P:
    """Return ``p`` unchanged if it satisfies every model constraint.

    Raises FellerViolation, CorrelationOutOfRange or NonPositiveInitialState.
    ``feller=False`` skips the two Feller inequalities; only moment formulas
    that hold without strict positivity (and full-truncation simulation)
    should be fed such parameters.
    """
    for name in ("kappa", "theta", "alpha", "beta"):
        if not getattr(p, name) >= 0.0:
            raise DegenerateParameter(f"{name} must be >= 0, got {getattr(p, name)}")
    for name in ("sigma", "eta"):
        if not getattr(p, name) >= 0.0:
            raise DegenerateParameter(f"{name} must be >= 0, got {getattr(p, name)}")
    if feller and 2.0 * p.kappa * p.theta < p.sigma**2:
        raise FellerViolation(
            f"Feller condition 2*kappa*theta >= sigma^2 violated: "
            f"{2.0 * p.kappa * p.theta:.6g} < {p.sigma**2:.6g}")
    if feller and 2.0 * p.alpha * p.beta < p.eta**2:
        raise FellerViolation(
            f"Feller condition 2*alpha*beta >= eta^2 violated: "
            f"{2.0 * p.alpha * p.beta:.6g} < {p.eta**2:.6g}")
    for name in ("rho", "rho13", "rho23"):
        v = getattr(p, name)
        if not -1.0 <= v <= 1.0:
            raise CorrelationOutOfRange(f"{name}={v} outside [-1, 1]")
    det = 1.0 + 2.0 * p.rho * p.rho13 * p.rho23 - p.rho**2 - p.rho13**2 - p.rho23**2
    if det < -PSD_TOL:
        raise CorrelationOutOfRange(f"correlation matrix not positive semi-definite (det={det:.3g})")
    for name in ("S0", "V0", "r0"):
        if not getattr(p, name) > 0.0:
            raise NonPositiveInitialState(f"{name} must be > 0, got {getattr(p, name)}")
    if isinstance(p, ForwardParams) and not p.maturity >= 0.0:
        raise ValidationError(f"maturity must be >= 0, got {p.maturity}")
    return p


def _common(p: _Diffusions) -> dict:
    keep = ("sigma", "eta", "rho", "rho13", "rho23", "S0", "V0", "r0", "jumps")
    return {k: getattr(p, k) for k in keep}


def to_risk_neutral(p: PhysicalParams, rp: RiskPrices, mode: Mode = "partial",
                    jumps: VGParams | None = None) -> RiskNeutralParams:
    """Apply the Heston-style risk-premium map.

    partial: kappa_Q = kappa + rho*sigma*(vartheta - sigma*rho*I) + lambda1*sqrt(1 - rho^2)
    full:    kappa_Q = kappa + lambda1
    both:    theta_Q = kappa*theta/kappa_Q, alpha_Q = alpha + lambda2,
             beta_Q = alpha*beta/alpha_Q.

    ``jumps`` is the risk-neutral kernel; defaults to the physical one.
    """
    validate(p)
    if mode == "partial":
        if rp.I is None:
            raise ValidationError("partial-correlation map needs the HJB constant I")
        kappa_q = (p.kappa + p.rho * p.sigma * (rp.vartheta - p.sigma * p.rho * rp.I)
                   + rp.lambda1 * math.sqrt(1.0 - p.rho**2))
    elif mode == "full":
        kappa_q = p.kappa + rp.lambda1
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    alpha_q = p.alpha + rp.lambda2
    if kappa_q <= 0.0:
        raise DegenerateParameter(f"risk-neutral kappa must be > 0, got {kappa_q}")
    if alpha_q <= 0.0:
        raise DegenerateParameter(f"risk-neutral alpha must be > 0, got {alpha_q}")
    common = _common(p)
    if jumps is not None:
        common["jumps"] = jumps
    return RiskNeutralParams(kappa=kappa_q, theta=p.kappa * p.theta / kappa_q,
                             alpha=alpha_q, beta=p.alpha * p.beta / alpha_q, **common)


def to_forward(q: RiskNeutralParams | ForwardParams, maturity: float) -> ForwardParams:
    """Starred parameters equal the risk-neutral ones; the -B(t,T) eta^2 r drift
    adjustment is applied by the ODE and simulation code, not stored here."""
    validate(q)
    return validate(ForwardParams(kappa=q.kappa, theta=q.theta, alpha=q.alpha, beta=q.beta,
                                  maturity=maturity, **_common(q)))


# Parameter sets used throughout the tests and the default configuration.

REFERENCE_VG = VGParams(drift=0.001, vol=0.001, rate=0.01)
PREMIUM_VG = VGParams(drift=0.02, vol=0.04, rate=0.01)


def reference_params(maturity: float = 1.0, **changes) -> ForwardParams:
    """Forward-measure parameters of the reference numerical study."""
    base = ForwardParams(kappa=2.0, theta=0.2236**2, sigma=0.1, alpha=1.2, beta=0.05,
                         eta=0.01, rho=-0.40, S0=1.0, V0=0.2236**2, r0=0.05,
                         jumps=REFERENCE_VG, maturity=maturity)
    return validate(replace(base, **changes))


def premium_example(**changes) -> PhysicalParams:
    """Physical-measure parameters of the equity-premium study (rho = 0).

    The rate block is not used by the premium formulas. The variance block
    has 2 kappa theta = 0.03 < sigma^2 = 0.04, so the Feller check is skipped:
    the premium moments are linear in E[V] and do not need positivity.
    """
    base = PhysicalParams(kappa=0.3, theta=0.05, sigma=0.2, alpha=1.2, beta=0.05, eta=0.01,
                          rho=0.0, S0=1.0, V0=0.035, r0=0.05, jumps=PREMIUM_VG, mu=0.1)
    return validate(replace(base, **changes), feller=False)
