"""Equilibrium equity premium and the HJB constants (I, K, M).

With Z = exp(-(M + I theta + K beta) / vartheta) the HJB system reads

    Gamma + kappa theta I + alpha beta K + Z (vartheta + theta I + beta K) = 0
    vartheta (1 - vartheta) / 2 - kappa I + sigma^2 I^2 / 2 - I Z      = 0
    1 - vartheta - alpha K + eta^2 K^2 / 2 - K Z                       = 0

Newton runs in (I, K, Z) rather than (I, K, M): the exponential coupling
becomes a bilinear one. Given Z the last two equations are quadratics, which
``scan_roots`` exploits to enumerate every root independently of Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NoRootFound, ValidationError
from .levy import GammaConvention, VGParams, hjb_gamma, premium_jump_integral
from .params import PhysicalParams, RiskPrices

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class HjbSolution:
    I: float
    K: float
    M: float
    residual: float
    iterations: int
    gamma: float
    roots: tuple[tuple[float, float, float], ...] = field(default=(), repr=False)


def _z(I, K, M, p, vartheta):
    return math.exp(-(M + I * p.theta + K * p.beta) / vartheta)


def hjb_residuals(I: float, K: float, M: float, p: PhysicalParams, rp: RiskPrices,
                  gamma: float) -> np.ndarray:
    """The three HJB equations evaluated at (I, K, M)."""
    v = rp.vartheta
    z = _z(I, K, M, p, v)
    return np.array([
        gamma + p.kappa * p.theta * I + p.alpha * p.beta * K
        + v * z * (1.0 + p.theta * I / v + p.beta * K / v),
        0.5 * v * (1.0 - v) - p.kappa * I + 0.5 * p.sigma**2 * I * I - I * z,
        1.0 - v - p.alpha * K + 0.5 * p.eta**2 * K * K - K * z,
    ])


def _f(x, p, v, gamma):
    I, K, z = x
    return np.array([
        gamma + p.kappa * p.theta * I + p.alpha * p.beta * K + z * (v + p.theta * I + p.beta * K),
        0.5 * v * (1.0 - v) - p.kappa * I + 0.5 * p.sigma**2 * I * I - I * z,
        1.0 - v - p.alpha * K + 0.5 * p.eta**2 * K * K - K * z,
    ])


def _jac(x, p, v):
    I, K, z = x
    return np.array([
        [p.kappa * p.theta + z * p.theta, p.alpha * p.beta + z * p.beta, v + p.theta * I + p.beta * K],
        [-p.kappa + p.sigma**2 * I - z, 0.0, -I],
        [0.0, -p.alpha + p.eta**2 * K - z, -K],
    ])


def _newton(x0, p, v, gamma, max_iter=100, tol=1e-14):
    """Damped Newton in (I, K, Z) keeping Z > 0. Returns (x, iterations) or None."""
    x = np.array(x0, dtype=float)
    fx = _f(x, p, v, gamma)
    norm = np.max(np.abs(fx))
    for it in range(1, max_iter + 1):
        try:
            step = np.linalg.solve(_jac(x, p, v), -fx)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-8:
            trial = x + lam * step
            if trial[2] > 0.0:
                ft = _f(trial, p, v, gamma)
                nt = np.max(np.abs(ft))
                if np.isfinite(nt) and nt < (1.0 - 1e-4 * lam) * norm or nt < tol:
                    break
            lam *= 0.5
        else:
            return None
        x, fx, norm = trial, ft, nt
        if norm < tol or np.max(np.abs(lam * step)) < 1e-15 * (1.0 + np.max(np.abs(x))):
            return x, it
    return (x, max_iter) if norm < 1e-11 else None


def _to_ikm(x, p, v):
    I, K, z = x
    return float(I), float(K), float(-v * math.log(z) - I * p.theta - K * p.beta)


def _small_branch(z, p, v):
    """Root of each quadratic that stays bounded as sigma, eta -> 0."""
    ri = (p.kappa + z) ** 2 - p.sigma**2 * v * (1.0 - v)
    rk = (p.alpha + z) ** 2 - 2.0 * p.eta**2 * (1.0 - v)
    if ri < 0.0 or rk < 0.0:
        return None
    I = v * (1.0 - v) / ((p.kappa + z) + math.sqrt(ri))
    K = 2.0 * (1.0 - v) / ((p.alpha + z) + math.sqrt(rk))
    return I, K


def scan_roots(p: PhysicalParams, rp: RiskPrices, gamma: float,
               z_range=(1e-8, 1e3), samples: int = 4000) -> list[tuple[float, float, float]]:
    """All roots with Z in ``z_range``: for each branch pair of the two
    quadratics, bracket sign changes of the first equation in Z."""
    v = rp.vartheta

    def branch(z, si, sk):
        ri = (p.kappa + z) ** 2 - p.sigma**2 * v * (1.0 - v)
        rk = (p.alpha + z) ** 2 - 2.0 * p.eta**2 * (1.0 - v)
        if ri < 0.0 or rk < 0.0:
            return None
        if si < 0:
            I = v * (1.0 - v) / ((p.kappa + z) + math.sqrt(ri))
        elif p.sigma > 0.0:
            I = ((p.kappa + z) + math.sqrt(ri)) / p.sigma**2
        else:
            return None
        if sk < 0:
            K = 2.0 * (1.0 - v) / ((p.alpha + z) + math.sqrt(rk))
        elif p.eta > 0.0:
            K = ((p.alpha + z) + math.sqrt(rk)) / p.eta**2
        else:
            return None
        return I, K

    def g(z, si, sk):
        b = branch(z, si, sk)
        if b is None:
            return math.nan
        return float(_f((b[0], b[1], z), p, v, gamma)[0])

    zs = np.geomspace(*z_range, samples)
    roots = []
    for si in (-1, 1):
        for sk in (-1, 1):
            vals = np.array([g(z, si, sk) for z in zs])
            for a, b, fa, fb in zip(zs[:-1], zs[1:], vals[:-1], vals[1:]):
                if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0.0:
                    z = brentq(g, a, b, args=(si, sk), xtol=1e-15, rtol=1e-15)
                    I, K = branch(z, si, sk)
                    roots.append(_to_ikm((I, K, z), p, v))
    return roots


def solve_hjb(p: PhysicalParams, rp: RiskPrices, vg: VGParams | None = None,
              convention: GammaConvention = "printed", homotopy_steps: int = 20) -> HjbSolution:
    """Solve the HJB system for (I, K, M).

    Every root reachable by Newton from a 3x3x3 grid of starts in (I, K, M)
    is collected; the one returned is the root continued from the no-jump
    system by ramping the jump part of Gamma from 0 to 1.
    """
    v = rp.vartheta
    vg = p.jumps if vg is None else vg
    gamma = hjb_gamma(v, rp.delta, vg, convention)

    found: list[tuple[np.ndarray, int]] = []
    for I0 in (-1.0, 0.0, 1.0):
        for K0 in (-1.0, 0.0, 1.0):
            for M0 in (-1.0, 0.0, 1.0):
                z0 = math.exp(min(-(M0 + I0 * p.theta + K0 * p.beta) / v, 50.0))
                out = _newton((I0, K0, z0), p, v, gamma)
                if out is not None:
                    found.append(out)
    roots: list[np.ndarray] = []
    for x, _ in found:
        if not any(np.allclose(x, r, rtol=1e-7, atol=1e-9) for r in roots):
            roots.append(x)

    # homotopy: no-jump root on the bounded branch, then switch the jumps on
    base = -rp.delta
    start = None
    for z in np.geomspace(1e-6, 1e2, 200):
        b = _small_branch(z, p, v)
        if b is not None:
            cand = _newton((b[0], b[1], z), p, v, base)
            if cand is not None:
                start = cand[0]
                break
    selected, iters = None, 0
    if start is not None:
        x = start
        for s in np.linspace(0.0, 1.0, homotopy_steps + 1)[1:]:
            out = _newton(x, p, v, base + s * (gamma - base))
            if out is None:
                x = None
                break
            x, iters = out
        selected = x
    if selected is None:
        if not roots:
            raise NoRootFound("no HJB root found from any start or by continuation")
        norms = [np.max(np.abs(_f(r, p, v, gamma))) for r in roots]
        selected = roots[int(np.argmin(norms))]
        iters = next(it for x, it in found if np.allclose(x, selected, rtol=1e-7, atol=1e-9))
    elif not any(np.allclose(selected, r, rtol=1e-7, atol=1e-9) for r in roots):
        roots.append(selected)

    I, K, M = _to_ikm(selected, p, v)
    res = float(np.max(np.abs(hjb_residuals(I, K, M, p, rp, gamma))))
    if not res <= RESIDUAL_TOL:
        raise NoRootFound(f"best HJB residual {res:.3g} above {RESIDUAL_TOL}")
    return HjbSolution(I=I, K=K, M=M, residual=res, iterations=iters, gamma=gamma,
                       roots=tuple(_to_ikm(r, p, v) for r in roots))


def multistart_roots(p: PhysicalParams, rp: RiskPrices, vg: VGParams | None = None,
                     convention: GammaConvention = "printed"):
    """(start, root) pairs in (I, K, M) for every converged start of the grid."""
    v = rp.vartheta
    vg = p.jumps if vg is None else vg
    gamma = hjb_gamma(v, rp.delta, vg, convention)
    out = []
    for I0 in (-1.0, 0.0, 1.0):
        for K0 in (-1.0, 0.0, 1.0):
            for M0 in (-1.0, 0.0, 1.0):
                z0 = math.exp(min(-(M0 + I0 * p.theta + K0 * p.beta) / v, 50.0))
                res = _newton((I0, K0, z0), p, v, gamma)
                if res is not None:
                    out.append(((I0, K0, M0), _to_ikm(res[0], p, v)))
    return out


def equity_premium(V, rp: RiskPrices, vg: VGParams | None, I: float = 0.0,
                   rho: float = 0.0, sigma: float = 0.0):
    """phi = (vartheta - sigma rho I) V + int (e^x - 1)(1 - e^{-vartheta x}) nu(dx)."""
    return (rp.vartheta - sigma * rho * I) * np.asarray(V) + premium_jump_integral(rp.vartheta, vg)


def expected_premium(t, p: PhysicalParams, rp: RiskPrices, vg: VGParams | None = None):
    """E[phi](t) for rho = 0: vartheta E[V_t] + jump integral."""
    if p.rho != 0.0:
        raise ValidationError("the expected-premium curve is defined for rho = 0")
    vg = p.jumps if vg is None else vg
    t = np.asarray(t, dtype=float)
    ev = np.exp(-p.kappa * t) * p.V0 + p.theta * -np.expm1(-p.kappa * t)
    out = rp.vartheta * ev + premium_jump_integral(rp.vartheta, vg)
    return float(out) if out.ndim == 0 else out
