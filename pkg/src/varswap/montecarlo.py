"""Monte Carlo oracle for the stochastic-volatility / CIR-rate / VG-jump model.

Euler with full truncation (optionally with the Milstein correction for the
two square-root factors): drifts and diffusion coefficients see V+ = max(V, 0)
and r+ = max(r, 0). The measure follows the parameter type:

* ``ForwardParams``: T-forward measure, rate drift alpha beta - (alpha + B eta^2) r,
  plus the full-correlation drift adjustments on X and V;
* ``RiskNeutralParams``: spot risk-neutral measure;
* ``PhysicalParams``: log-price drift mu - V/2 - psi(1).

Paths are generated in fixed-size chunks, each with its own generator keyed
by (seed, chunk index), and the per-chunk sums are combined in chunk order.
Results are therefore reproducible for a fixed seed whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ConfigError, GridMismatch
from .levy import char_exponent
from .params import ForwardParams, PhysicalParams, validate
from .pricer import SwapContract
from .rates import b_of_tau

SCHEMES = ("euler-full-truncation", "milstein-full-truncation")
GRID_TOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    paths: int = 100_000
    steps_per_year: int = 252
    seed: int = 0
    scheme: str = "euler-full-truncation"
    antithetic: bool = False
    chunk_size: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.paths < 1:
            raise ConfigError("paths must be >= 1")
        if self.steps_per_year < 12:
            raise ConfigError("steps_per_year must be >= 12")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.chunk_size < 2:
            raise ConfigError("chunk_size must be >= 2")
        if self.antithetic and (self.paths % 2 or self.chunk_size % 2):
            raise ConfigError("antithetic sampling needs even paths and chunk_size")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    paths: int

    def within(self, target: float, n_stderr: float = 3.0, rel: float = 0.0) -> bool:
        return abs(self.mean - target) <= max(n_stderr * self.stderr, rel * abs(target))


@dataclass
class PathBlock:
    """One chunk of paths sampled at ``times``; arrays are (paths, len(times)).
    V and r are stored truncated at zero; ``int_r`` is the trapezoidal
    integral of r+ from 0."""

    times: np.ndarray
    X: np.ndarray
    V: np.ndarray
    r: np.ndarray
    int_r: np.ndarray

    def at(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > GRID_TOL:
            raise GridMismatch(f"time {t} was not recorded")
        return idx


def correlation_factor(p, mode: str = "partial") -> np.ndarray:
    """Lower factor L with L L^T the (X, V, r) correlation matrix."""
    if mode == "partial":
        c = np.array([[1.0, p.rho, 0.0], [p.rho, 1.0, 0.0], [0.0, 0.0, 1.0]])
    elif mode == "full":
        c = np.array([[1.0, p.rho, p.rho13], [p.rho, 1.0, p.rho23], [p.rho13, p.rho23, 1.0]])
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    try:
        return np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        # singular but PSD: symmetric square root is a valid factor
        w, q = np.linalg.eigh(c)
        return q * np.sqrt(np.clip(w, 0.0, None))


def _step_grid(horizon: float, cfg: SimConfig, record_times: Sequence[float]):
    steps_f = horizon * cfg.steps_per_year
    steps = int(round(steps_f))
    if steps < 1 or abs(steps - steps_f) > GRID_TOL * max(1.0, steps_f):
        raise GridMismatch(f"horizon {horizon} is not a whole number of steps at {cfg.steps_per_year}/year")
    idx = []
    for t in record_times:
        k_f = t * cfg.steps_per_year
        k = int(round(k_f))
        if abs(k - k_f) > GRID_TOL * max(1.0, k_f) or not 0 <= k <= steps:
            raise GridMismatch(f"record time {t} does not fall on the simulation grid")
        idx.append(k)
    return steps, np.asarray(idx, dtype=int)


def _chunk_sizes(cfg: SimConfig) -> list[int]:
    full, rest = divmod(cfg.paths, cfg.chunk_size)
    return [cfg.chunk_size] * full + ([rest] if rest else [])


def _simulate_chunk(p, cfg: SimConfig, chunk: int, n: int, horizon: float,
                    steps: int, rec_idx: np.ndarray, mode: str) -> PathBlock:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, chunk])))
    dt = horizon / steps
    forward = isinstance(p, ForwardParams)
    physical = isinstance(p, PhysicalParams)
    full = mode == "full"
    milstein = cfg.scheme == "milstein-full-truncation"
    L = correlation_factor(p, mode)
    comp = char_exponent(1.0, p.jumps)
    base = n // 2 if cfg.antithetic else n

    X = np.full(n, math.log(p.S0))
    V = np.full(n, float(p.V0))
    r = np.full(n, float(p.r0))
    I = np.zeros(n)
    k_rec = len(rec_idx)
    out = {name: np.empty((n, k_rec)) for name in ("X", "V", "r", "I")}

    def record(k):
        for j in np.nonzero(rec_idx == k)[0]:
            out["X"][:, j], out["I"][:, j] = X, I
            out["V"][:, j], out["r"][:, j] = np.maximum(V, 0.0), np.maximum(r, 0.0)

    def draw(shape_rows):
        z = rng.standard_normal((shape_rows, base))
        return np.concatenate([z, -z], axis=1) if cfg.antithetic else z

    record(0)
    for k in range(steps):
        t = k * dt
        vp = np.maximum(V, 0.0)
        rp = np.maximum(r, 0.0)
        z = L @ draw(3)
        sv = np.sqrt(vp * dt)
        sr = np.sqrt(rp * dt)
        bb = b_of_tau(p.maturity - t, p.alpha, p.eta) if forward else 0.0

        mu_x = (p.mu if physical else rp) - 0.5 * vp - comp
        mu_v = p.kappa * (p.theta - vp)
        mu_r = p.alpha * p.beta - (p.alpha + bb * p.eta**2) * rp
        if forward and full and bb > 0.0:
            root = np.sqrt(vp * rp)
            mu_x = mu_x - p.rho13 * bb * p.eta * root
            mu_v = mu_v - p.rho23 * p.sigma * bb * p.eta * root

        dx = mu_x * dt + sv * z[0]
        if p.jumps is not None:
            g = rng.gamma(dt / p.jumps.rate, p.jumps.rate, size=base)
            zj = draw(1)[0]
            if cfg.antithetic:
                g = np.concatenate([g, g])
            dx = dx + p.jumps.drift * g + p.jumps.vol * np.sqrt(g) * zj
        X = X + dx
        V = V + mu_v * dt + p.sigma * sv * z[1]
        r_new = r + mu_r * dt + p.eta * sr * z[2]
        if milstein:
            V = V + 0.25 * p.sigma**2 * dt * (z[1] ** 2 - 1.0)
            r_new = r_new + 0.25 * p.eta**2 * dt * (z[2] ** 2 - 1.0)
        I = I + 0.5 * (rp + np.maximum(r_new, 0.0)) * dt
        r = r_new
        record(k + 1)
    return PathBlock(times=rec_idx * dt, X=out["X"], V=out["V"], r=out["r"], int_r=out["I"])


def _check_params(p, horizon: float, mode: str):
    validate(p, feller=not isinstance(p, PhysicalParams))
    if mode not in ("partial", "full"):
        raise ConfigError(f"unknown mode {mode!r}")
    if not horizon > 0.0:
        raise ConfigError("horizon must be > 0")
    if isinstance(p, ForwardParams) and horizon > p.maturity + GRID_TOL:
        raise ConfigError("forward-measure simulation cannot run past the bond maturity")


def simulate(p, cfg: SimConfig, horizon: float, record_times: Sequence[float] | None = None,
             mode: str = "partial") -> Iterator[PathBlock]:
    """Stream path chunks sampled at ``record_times`` (default: the horizon)."""
    _check_params(p, horizon, mode)
    record_times = [horizon] if record_times is None else list(record_times)
    steps, rec_idx = _step_grid(horizon, cfg, record_times)
    for chunk, n in enumerate(_chunk_sizes(cfg)):
        yield _simulate_chunk(p, cfg, chunk, n, horizon, steps, rec_idx, mode)


def _chunk_stats(values: np.ndarray, antithetic: bool):
    """(n, shift, sum, sum of squares) per column of a (paths, k) array."""
    if antithetic:
        half = values.shape[0] // 2
        values = 0.5 * (values[:half] + values[half:])
    shift = values[0].copy()
    d = values - shift
    return values.shape[0], shift, np.sum(d, axis=0), np.sum(d * d, axis=0)


def _combine(stats, paths: int) -> list[McEstimate]:
    """Merge per-chunk statistics about a common shift.
    Identical samples give exactly zero spread."""
    k0 = stats[0][1]
    n_tot, s1, s2 = 0, np.zeros_like(k0), np.zeros_like(k0)
    for n, k, a, b in stats:
        off = k - k0
        s1 = s1 + a + n * off
        s2 = s2 + b + 2.0 * off * a + n * off * off
        n_tot += n
    mean = k0 + s1 / n_tot
    if n_tot < 2:
        return [McEstimate(float(m), math.nan, paths) for m in mean]
    var = np.maximum((s2 - s1 * s1 / n_tot) / (n_tot - 1), 0.0)
    return [McEstimate(float(m), float(math.sqrt(v / n_tot)), paths) for m, v in zip(mean, var)]


def mc_expectations(f: Callable[[PathBlock], np.ndarray], p, cfg: SimConfig, horizon: float,
                    record_times: Sequence[float] | None = None,
                    mode: str = "partial") -> list[McEstimate]:
    """Estimates for a functional returning a (paths, k) array, one per column,
    all from a single simulation pass."""
    _check_params(p, horizon, mode)
    record_times = [horizon] if record_times is None else list(record_times)
    steps, rec_idx = _step_grid(horizon, cfg, record_times)

    def run(item):
        chunk, n = item
        block = _simulate_chunk(p, cfg, chunk, n, horizon, steps, rec_idx, mode)
        vals = np.asarray(f(block), dtype=float)
        vals = vals.reshape(n, -1) if vals.ndim else np.full((n, 1), float(vals))
        return _chunk_stats(vals, cfg.antithetic)

    items = list(enumerate(_chunk_sizes(cfg)))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            stats = list(pool.map(run, items))
    else:
        stats = [run(it) for it in items]
    return _combine(stats, cfg.paths)


def mc_expectation(f: Callable[[PathBlock], np.ndarray], p, cfg: SimConfig, horizon: float,
                   record_times: Sequence[float] | None = None, mode: str = "partial") -> McEstimate:
    """Sample mean and standard error of the scalar path functional ``f``.

    With antithetic sampling the standard error is computed from pair averages.
    """
    out = mc_expectations(f, p, cfg, horizon, record_times, mode)
    if len(out) != 1:
        raise ConfigError("functional must return one value per path; use mc_expectations")
    return out[0]


def mc_fair_strike(contract: SwapContract, p, cfg: SimConfig, mode: str = "partial") -> McEstimate:
    """NA * sum_i (ln S_{t_i} / S_{t_{i-1}})^m averaged over paths."""
    times = contract.times
    m, na = contract.moment, contract.notional

    def payoff(block: PathBlock):
        return na * np.sum(np.diff(block.X, axis=1) ** m, axis=1)

    return mc_expectation(payoff, p, cfg, float(times[-1]), times, mode)


def sample_paths(p, cfg: SimConfig, horizon: float, record_times: Sequence[float],
                 count: int, mode: str = "partial") -> PathBlock:
    """The first ``count`` paths of the ensemble (taken from chunk 0)."""
    if count > min(cfg.paths, cfg.chunk_size):
        raise ConfigError("count must not exceed paths or chunk_size")
    block = next(simulate(p, cfg, horizon, record_times, mode))
    return PathBlock(block.times, block.X[:count], block.V[:count], block.r[:count],
                     block.int_r[:count])
