"""CIR zero-coupon bond: P(t,T) = A(t,T) exp(-B(t,T) r).

With gamma = sqrt(alpha^2 + 2 eta^2) and x = exp(-gamma (T-t)) both
coefficients are evaluated in the rearranged form

    B   = 2 (1 - x) / ((alpha + gamma) + (gamma - alpha) x)
    ln A = (2 alpha beta / eta^2) [ (alpha - gamma)(T-t)/2
                                    + ln(2 gamma / ((alpha + gamma) + (gamma - alpha) x)) ]

which is algebraically the textbook CIR grouping exp((alpha+gamma)(T-t)/2)
but cannot overflow for long windows and stays accurate as eta -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidWindow


@dataclass(frozen=True)
class BondCoefficients:
    A: float
    B: float


def _window(t, T):
    tau = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(tau < -1e-14):
        raise InvalidWindow(f"bond window requires t <= T (t={t}, T={T})")
    return np.maximum(tau, 0.0)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def b_of_tau(tau, alpha: float, eta: float):
    """B as a function of time to maturity."""
    tau = np.asarray(tau, dtype=float)
    gamma = np.sqrt(alpha * alpha + 2.0 * eta * eta)
    if gamma == 0.0:
        return _scalar(tau.copy())
    eps = 2.0 * eta * eta / (alpha + gamma)  # gamma - alpha without cancellation
    x = np.exp(-gamma * tau)
    return _scalar(-2.0 * np.expm1(-gamma * tau) / ((alpha + gamma) + eps * x))


def log_a_of_tau(tau, alpha: float, beta: float, eta: float):
    tau = np.asarray(tau, dtype=float)
    if eta == 0.0:
        if alpha == 0.0:
            return _scalar(np.zeros_like(tau))
        b = -np.expm1(-alpha * tau) / alpha
        return _scalar(-beta * (tau - b))
    gamma = np.sqrt(alpha * alpha + 2.0 * eta * eta)
    s = alpha + gamma
    eps = 2.0 * eta * eta / s
    x = np.exp(-gamma * tau)
    # (alpha - gamma) tau / 2 = -eta^2 tau / s
    inner = -eta * eta * tau / s + np.log1p(eps * (-np.expm1(-gamma * tau)) / (s + eps * x))
    return _scalar(2.0 * alpha * beta / (eta * eta) * inner)


def bond_B(t, T, p):
    """B(t,T) in years, for parameters exposing ``alpha`` and ``eta``."""
    return b_of_tau(_window(t, T), p.alpha, p.eta)


def bond_A(t, T, p):
    return _scalar(np.exp(log_a_of_tau(_window(t, T), p.alpha, p.beta, p.eta)))


def bond_coefficients(t: float, T: float, p) -> BondCoefficients:
    return BondCoefficients(A=bond_A(t, T, p), B=bond_B(t, T, p))


def bond_price(t, T, r, p):
    """A(t,T) exp(-B(t,T) r)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise InvalidWindow("short rate must be >= 0")
    tau = _window(t, T)
    return _scalar(np.exp(log_a_of_tau(tau, p.alpha, p.beta, p.eta)
                          - b_of_tau(tau, p.alpha, p.eta) * r))
