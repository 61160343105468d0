"""Fair strikes of discretely sampled variance (and m-th moment) swaps.

For each sampling period the forward-measure MGF of the log return,

    g_i(w) = E^T[exp(w (X_{t_i} - X_{t_{i-1}}))],

is obtained from two nested affine legs: an inner leg over [t_{i-1}, t_i]
with terminal (w, 0, 0, 0) and an outer leg over [0, t_{i-1}] whose terminal
is the inner result with the omega loading dropped. The m-th moment of the
return is the m-th derivative of g_i at w = 0 from the left.

g_i is differentiated through its exponent Phi_i = log g_i: the exponent is
O(w) small, so its float representation keeps full relative precision,
whereas g_i itself sits at 1 + O(w) and loses eight digits to cancellation.
The derivatives of exp(Phi) then follow from Phi's derivatives via complete
Bell polynomials (Phi(0) = 0).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .affine import AffineCoefficients, omega_lower_bound, solve_leg
from .errors import StencilOutsideAdmissibleRegion, ValidationError
from .levy import moment_bounds
from .moments import CrossMoment
from .options import Conventions
from .params import ForwardParams, validate

# states in a pricing leg are O(w dt) small, so error control is relative
PRICING_RTOL = 1e-10
PRICING_ATOL = 1e-24


@dataclass(frozen=True)
class SwapContract:
    """Swap on sum_i (ln S_{t_i} / S_{t_{i-1}})^m times ``notional``.

    ``grid`` defaults to N equal periods on [0, maturity].
    """

    maturity: float
    periods: int
    notional: float = 1.0
    moment: int = 2
    grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.periods < 1:
            raise ValidationError("need at least one sampling period")
        if self.moment < 1:
            raise ValidationError("moment order must be >= 1")
        if not self.maturity > 0.0:
            raise ValidationError("maturity must be > 0")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if len(g) != self.periods + 1 or g[0] != 0.0 or not math.isclose(g[-1], self.maturity):
                raise ValidationError("grid must run from 0 to maturity with periods + 1 points")
            if np.any(np.diff(g) <= 0.0):
                raise ValidationError("grid must be strictly increasing")

    @property
    def times(self) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=float)
        return np.linspace(0.0, self.maturity, self.periods + 1)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)


@dataclass
class StrikeResult:
    strike: float
    contributions: np.ndarray
    step: float
    nodes: np.ndarray
    error_estimate: float
    halved_contributions: np.ndarray = field(repr=False)

    @property
    def periods(self) -> int:
        return len(self.contributions)


def one_sided_weights(order: int, nodes) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 from
    function values at ``nodes`` (in units of the step)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if order >= n:
        raise ValidationError("need more nodes than the derivative order")
    vander = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


def stencil(m: int) -> np.ndarray:
    """Node offsets 0, -1, ..., -(m+2) in units of h."""
    return -np.arange(m + 3, dtype=float)


def default_step(m: int) -> float:
    return 1e-4 if m <= 2 else 10.0 ** (-4 + (m - 2))


def derivative_at_zero_minus(g: Callable[[float], float], m: int = 2, h: float | None = None,
                             lower_bound: float = -math.inf) -> tuple[float, float]:
    """One-sided m-th derivative of g at 0 from below.

    Uses nodes {0, -h, ..., -(m+2)h}; returns (value, |D(h) - D(h/2)|) as a
    truncation-error estimate.
    """
    if m < 1:
        raise ValidationError("derivative order must be >= 1")
    h = default_step(m) if h is None else h
    if not h > 0.0:
        raise ValidationError("step must be > 0")
    offsets = stencil(m)
    if offsets[-1] * h <= lower_bound:
        raise StencilOutsideAdmissibleRegion(
            f"stencil reaches {offsets[-1] * h:.3g}, below admissible bound {lower_bound:.6g}")
    w = one_sided_weights(m, offsets)
    # the weights sum to zero, so differencing against g(0) changes nothing
    # mathematically and makes constants map to exactly zero
    g0 = g(0.0)
    full = sum(wi * (g(x * h) - g0) for wi, x in zip(w, offsets)) / h**m
    half = sum(wi * (g(x * h / 2) - g0) for wi, x in zip(w, offsets)) / (h / 2) ** m
    return float(full), float(abs(full - half))


def bell_polynomial(derivs) -> float:
    """Complete Bell polynomial B_n(x_1..x_n): the n-th derivative of exp(f)
    at a point where f = 0 and f^(k) = x_k."""
    n = len(derivs)
    b = [1.0]
    for k in range(n):
        b.append(sum(math.comb(k, j) * b[k - j] * derivs[j] for j in range(k + 1)))
    return b[n]


def _windows(i: int, contract: SwapContract, p: ForwardParams, nesting: str):
    t = contract.times
    lo, hi = t[i - 1], t[i]
    if nesting == "absolute":
        return (lo, hi), (0.0, lo)
    T = p.maturity
    return (T - (hi - lo), T), (T - lo, T)


def period_exponent(i: int, omega, contract: SwapContract, p: ForwardParams,
                    conv: Conventions = Conventions(), cross_moment=None,
                    *, rtol: float = PRICING_RTOL, atol: float = PRICING_ATOL) -> np.ndarray:
    """log E^T[exp(w (X_{t_i} - X_{t_{i-1}}))] for an array of w."""
    if not 1 <= i <= contract.periods:
        raise ValidationError(f"period index {i} outside 1..{contract.periods}")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if conv.mode == "full" and cross_moment is None:
        cross_moment = CrossMoment.from_params(p, conv)
    (a0, a1), (b0, b1) = _windows(i, contract, p, conv.nesting)
    inner = solve_leg(a0, a1, AffineCoefficients(omega, 0.0, 0.0, 0.0), p, conv, cross_moment,
                      rtol=rtol, atol=atol, residual_points=0).coeffs
    outer = solve_leg(b0, b1, AffineCoefficients(0.0, inner.C, inner.D, inner.E), p, conv,
                      cross_moment, rtol=rtol, atol=atol, residual_points=0).coeffs
    return np.asarray(outer.C * p.V0 + outer.D * p.r0 + outer.E, dtype=float)


def period_mgf(i: int, omega, contract: SwapContract, p: ForwardParams,
               conv: Conventions = Conventions(), cross_moment=None):
    out = np.exp(period_exponent(i, omega, contract, p, conv, cross_moment))
    return float(out[0]) if np.ndim(omega) == 0 else out


def admissible_floor(p: ForwardParams) -> float:
    """Most negative omega the stencil may reach."""
    floor = omega_lower_bound(p)
    if p.jumps is not None:
        floor = max(floor, moment_bounds(p.jumps)[0])
    return floor


def _period_moment(i, contract, p, conv, cross_moment, h):
    m = contract.moment
    offsets = stencil(m)
    k = len(offsets)
    grid = np.concatenate([offsets * h, offsets * (h / 2)])
    phi = period_exponent(i, grid, contract, p, conv, cross_moment)
    out = []
    for values, step in ((phi[:k], h), (phi[k:], h / 2)):
        derivs = [float(one_sided_weights(j, offsets) @ values) / step**j for j in range(1, m + 1)]
        out.append(bell_polynomial(derivs))
    return out


def fair_strike(contract: SwapContract, p: ForwardParams, conv: Conventions = Conventions(),
                h: float | None = None, workers: int = 1) -> StrikeResult:
    """NA * sum_i d^m/dw^m g_i(w) at w = 0-."""
    validate(p)
    if contract.times[-1] > p.maturity + 1e-12:
        raise ValidationError("contract maturity exceeds the forward-measure maturity")
    m = contract.moment
    h = default_step(m) if h is None else h
    offsets = stencil(m)
    if offsets[-1] * h <= admissible_floor(p):
        raise StencilOutsideAdmissibleRegion(
            f"stencil reaches {offsets[-1] * h:.3g}, below admissible bound {admissible_floor(p):.6g}")
    cross = CrossMoment.from_params(p, conv) if conv.mode == "full" else None

    def one(i):
        return _period_moment(i, contract, p, conv, cross, h)

    indices = range(1, contract.periods + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            pairs = list(pool.map(one, indices))
    else:
        pairs = [one(i) for i in indices]
    contrib = contract.notional * np.array([a for a, _ in pairs])
    halved = contract.notional * np.array([b for _, b in pairs])
    return StrikeResult(strike=float(contrib.sum()), contributions=contrib, step=h,
                        nodes=offsets * h, error_estimate=float(abs(contrib.sum() - halved.sum())),
                        halved_contributions=halved)


def continuous_limit_reference(contract: SwapContract, p: ForwardParams,
                               with_jumps: bool = True) -> float:
    """Continuously sampled counterpart: expected integrated variance with a
    constant-coefficient variance drift, plus the jump quadratic variation."""
    T = contract.maturity
    if p.kappa * T > 0.0:
        avg = p.theta + (p.V0 - p.theta) * -math.expm1(-p.kappa * T) / (p.kappa * T)
    else:
        avg = p.V0
    jump = p.jumps.second_moment_rate if (with_jumps and p.jumps is not None) else 0.0
    return contract.notional * (avg * T + T * jump)
