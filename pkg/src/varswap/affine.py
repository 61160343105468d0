"""Affine coefficients of the joint MGF of (X, V, r) under the T-forward measure.

For a terminal payoff exp(w X + phi V + psi r + chi) the conditional
expectation at an earlier time is exp(w X + C V + D r + E), where, with tau
the time remaining in the leg and t = t1 - tau the calendar time,

    C' = sigma^2/2 C^2 + (rho sigma w - kappa) C + (w^2 - w)/2
    D' = eta^2/2 D^2 - (alpha + B(t,T) eta^2) D + w
    E' = kappa theta C + alpha beta D + J(w)  [+ full-correlation terms]

``solve_leg`` integrates these backward over an absolute window [t0, t1];
``omega`` may be an array, in which case all systems share one step sequence
(finite differences in omega then see a smooth discretisation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    InadmissibleExponent,
    InvalidWindow,
    OdeNonConvergence,
    Overflow,
    SingularF,
    ValidationError,
)
from .levy import jump_term_J
from .options import Conventions
from .params import ForwardParams
from .rates import b_of_tau

RTOL = 1e-10
ATOL = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class AffineCoefficients:
    omega: float | np.ndarray
    C: float | np.ndarray
    D: float | np.ndarray
    E: float | np.ndarray

    @classmethod
    def terminal(cls, omega=0.0, varphi=0.0, psi=0.0, chi=0.0) -> "AffineCoefficients":
        return cls(omega, varphi, psi, chi)

    def exponent(self, X, V, r):
        return self.omega * X + self.C * V + self.D * r + self.E


@dataclass(frozen=True)
class LegSolution:
    coeffs: AffineCoefficients
    steps: int
    max_residual: float


def omega_lower_bound(p: ForwardParams) -> float:
    """Open lower end of the admissible range (sigma - sqrt(sigma^2 + 4 kappa^2)) / (2 sigma)."""
    if p.sigma == 0.0:
        return -math.inf
    return (p.sigma - math.sqrt(p.sigma**2 + 4.0 * p.kappa**2)) / (2.0 * p.sigma)


def check_admissible(omega, varphi=0.0, psi=0.0, p: ForwardParams | None = None):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega > 0.0) or np.any(np.asarray(varphi) > 0.0) or np.any(np.asarray(psi) > 0.0):
        raise InadmissibleExponent("admissibility needs omega <= 0, varphi <= 0, psi <= 0")
    if p is not None and np.any(omega <= omega_lower_bound(p)):
        raise InadmissibleExponent(
            f"omega below admissible bound {omega_lower_bound(p):.6g}")


def riccati_C_closed(tau, omega: float, varphi: float, p: ForwardParams):
    """Closed-form variance loading C(tau; omega, varphi)."""
    b = p.kappa - p.rho * p.sigma * omega
    zeta2 = b * b + p.sigma**2 * (omega - omega * omega)
    if zeta2 < 0.0:
        raise InadmissibleExponent(f"zeta^2 = {zeta2:.3g} < 0")
    zeta = math.sqrt(zeta2)
    xi_p, xi_m = zeta - b, zeta + b
    e = np.exp(-zeta * np.asarray(tau, dtype=float))
    s2 = p.sigma**2
    num = varphi * (xi_m * e + xi_p) + (omega * omega - omega) * (1.0 - e)
    den = (xi_p + varphi * s2) * e + xi_m - varphi * s2
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


class _System:
    """Right-hand side of the coefficient ODEs in the leg clock tau = t1 - t."""

    def __init__(self, p: ForwardParams, omega: np.ndarray, t1: float, conv: Conventions,
                 cross_moment: Callable[[float], float] | None):
        self.p = p
        self.omega = omega
        self.t1 = t1
        self.q = conv.d_quadratic(p.eta)
        self.forcing_c = 0.5 * (omega * omega - omega)
        self.slope_c = p.rho * p.sigma * omega - p.kappa
        self.jump = np.array([jump_term_J(float(w), p.jumps) for w in omega])
        self.full = conv.mode == "full"
        if self.full:
            if cross_moment is None:
                raise ValidationError("full-correlation mode needs a cross-moment function")
            self.cross = cross_moment
            self.x_sign = -1.0 if conv.x_drift_sign == "derived" else 1.0

    def bond_b(self, tau):
        # B(t, T) at calendar time t = t1 - tau
        return b_of_tau(max(self.p.maturity - (self.t1 - tau), 0.0), self.p.alpha, self.p.eta)

    def rates(self, tau: float, C, D):
        p = self.p
        bb = self.bond_b(tau)
        dC = 0.5 * p.sigma**2 * C * C + self.slope_c * C + self.forcing_c
        dD = self.q * D * D - (p.alpha + bb * p.eta**2) * D + self.omega
        dE = p.kappa * p.theta * C + p.alpha * p.beta * D + self.jump
        if self.full:
            cm = self.cross(self.t1 - tau)
            dE = dE + cm * p.eta * (
                self.x_sign * p.rho13 * self.omega * bb
                + p.rho13 * self.omega * D
                - p.rho23 * p.sigma * bb * C
                + p.rho23 * p.sigma * C * D)
        return dC, dD, dE

    def __call__(self, tau, y):
        n = self.omega.size
        dC, dD, dE = self.rates(tau, y[:n], y[n:2 * n])
        return np.concatenate([dC, dD, dE])


def solve_leg(t0: float, t1: float, terminal: AffineCoefficients, p: ForwardParams,
              conv: Conventions = Conventions(),
              cross_moment: Callable[[float], float] | None = None,
              *, rtol: float = RTOL, atol: float = ATOL,
              residual_points: int = 20) -> LegSolution:
    """Integrate the coefficient ODEs backward in calendar time from t1 to t0.

    ``terminal`` gives (omega, varphi, psi, chi) at t1; its fields may be
    arrays of a common shape. ``cross_moment(t)`` approximates E[sqrt(V_t r_t)]
    and is required in full-correlation mode.
    """
    if not 0.0 <= t0 <= t1 + 1e-14:
        raise InvalidWindow(f"leg window needs 0 <= t0 <= t1 (got {t0}, {t1})")
    if t1 > p.maturity + 1e-12:
        raise InvalidWindow(f"leg end {t1} beyond maturity {p.maturity}")
    omega = np.atleast_1d(np.asarray(terminal.omega, dtype=float))
    shape = np.broadcast(omega, terminal.C, terminal.D, terminal.E).shape
    omega = np.broadcast_to(omega, shape).ravel()
    y0 = np.concatenate([np.broadcast_to(np.asarray(v, dtype=float), shape).ravel()
                         for v in (terminal.C, terminal.D, terminal.E)])
    if not np.all(np.isfinite(y0)):
        raise ValidationError("terminal coefficients must be finite")
    scalar = np.ndim(terminal.omega) == 0 and all(np.ndim(v) == 0 for v in (terminal.C, terminal.D, terminal.E))
    width = t1 - t0
    n = omega.size

    def pack(y):
        parts = [y[:n], y[n:2 * n], y[2 * n:]]
        if scalar:
            return AffineCoefficients(float(omega[0]), *(float(v[0]) for v in parts))
        return AffineCoefficients(omega.reshape(shape), *(v.reshape(shape) for v in parts))

    if width <= 0.0:
        return LegSolution(pack(y0), steps=0, max_residual=0.0)
    if not np.any(omega) and not np.any(y0):
        # zero forcing and zero terminal data: the solution is identically zero
        return LegSolution(pack(y0), steps=0, max_residual=0.0)

    system = _System(p, omega, t1, conv, cross_moment)
    sol = solve_ivp(system, (0.0, width), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=residual_points > 0)
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise OdeNonConvergence(f"coefficient ODE failed on [{t0}, {t1}]: {sol.message}")
    residual = _integral_residual(system, sol.sol, width, residual_points) if residual_points else math.nan
    return LegSolution(pack(sol.y[:, -1]), steps=len(sol.t) - 1, max_residual=residual)


def _integral_residual(system: _System, dense, width: float, pieces: int) -> float:
    """max over sub-intervals of |y(b) - y(a) - int_a^b f(y)| / (b - a)."""
    edges = np.linspace(0.0, width, pieces + 1)
    worst = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        integral = sum(w * system(mid + half * x, dense(mid + half * x))
                       for x, w in zip(_GL_NODES, _GL_WEIGHTS)) * half
        worst = max(worst, float(np.max(np.abs(dense(b) - dense(a) - integral))) / (b - a))
    return worst


def fg_cross_check(tau: float, omega: float, psi: float, p: ForwardParams,
                   conv: Conventions = Conventions(), t1: float | None = None,
                   *, rtol: float = 1e-12, atol: float = 1e-14):
    """Linearised representation of D: D = -G/F with

        -d/dtau [F, G] = [[-a/2, -q], [omega, a/2]] [F, G],   (F, G)(0) = (1, -psi),

    a = alpha + B eta^2 and q the D^2 coefficient. Returns (F, G, D_check).
    """
    if t1 is None:
        t1 = p.maturity
    q = conv.d_quadratic(p.eta)

    def rhs(s, y):
        a = p.alpha + b_of_tau(max(p.maturity - (t1 - s), 0.0), p.alpha, p.eta) * p.eta**2
        F, G = y
        return [0.5 * a * F + q * G, -omega * F - 0.5 * a * G]

    if tau == 0.0:
        F, G = 1.0, -psi
    else:
        sol = solve_ivp(rhs, (0.0, tau), [1.0, -psi], method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise OdeNonConvergence(sol.message)
        F, G = sol.y[:, -1]
    if abs(F) < 1e-14:
        raise SingularF(f"|F| = {abs(F):.3g} at tau = {tau}")
    return float(F), float(G), float(-G / F)


def mgf_value(coeffs: AffineCoefficients, X, V, r):
    """exp(omega X + C V + D r + E)."""
    z = coeffs.exponent(X, V, r)
    if np.any(~np.isfinite(z)) or np.any(np.asarray(z) > 709.0):
        raise Overflow("MGF exponent outside representable range")
    out = np.exp(z)
    return float(out) if np.ndim(out) == 0 else out
