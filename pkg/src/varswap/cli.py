"""Command-line front end.

    varswap {price,compare,premium,bond,simulate,fit-abc} [--config PATH]
            [--seed N] [--out PATH] [--mode partial|full]
            [--nesting absolute|paper_literal] [--annualize]

Every command writes UTF-8 CSV (to --out or stdout) that starts with a
``# schema: <name>/v1`` line followed by a header row whose column names
carry their units. A one-line human summary goes to stderr.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import replace

import numpy as np

from .config import JobConfig, load_config, parse_config
from .equilibrium import equity_premium, expected_premium
from .errors import ConfigError, NumericalError, ValidationError
from .moments import CirMomentSpec, fit_abc, sqrt_expectation_exact, sqrt_expectation_omega1
from .montecarlo import mc_expectation, mc_expectations, mc_fair_strike, sample_paths
from .pricer import fair_strike
from .rates import bond_coefficients

log = logging.getLogger("varswap")

DEFAULT_CONFIG = """\
# Reference parameter set (forward-measure values) for the variance swap study.
[model]
measure = risk_neutral
kappa = 2.0
theta = 0.04999696
sigma = 0.1
alpha = 1.2
beta = 0.05
eta = 0.01
rho = -0.4
rho13 = 0.0
rho23 = 0.0
S0 = 1.0
V0 = 0.04999696
r0 = 0.05
vg_drift = 0.001
vg_vol = 0.001
vg_rate = 0.01

[contract]
maturity = 1.0
periods = 252
notional = 1.0
moment = 2

[run]
mode = partial
nesting = absolute

[mc]
paths = 200000
steps_per_year = 252
seed = 20240101
ladder = 10000, 50000, 200000

[bond]
maturities = 0, 0.5, 1, 2, 5, 10, 30
mc_paths = 0

[compare]
beta_sweep =
"""


class _Table:
    def __init__(self, schema: str, header: list[str]):
        self.schema = schema
        self.header = header
        self.rows: list[list] = []

    def add(self, *row):
        self.rows.append(list(row))

    def write(self, fh):
        fh.write(f"# schema: {self.schema}/v1\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return x


def cmd_price(job: JobConfig) -> tuple[list[_Table], str]:
    p = job.forward()
    res = fair_strike(job.contract, p, job.conv, h=job.step, workers=job.workers)
    scale = 1.0 / job.contract.maturity if job.annualize else 1.0
    unit = "log-return^%d%s" % (job.contract.moment, "/yr" if job.annualize else "")
    t = _Table("price", ["period", "t_start[yr]", "t_end[yr]", f"contribution[{unit}]"])
    times = job.contract.times
    for i, c in enumerate(res.contributions, start=1):
        t.add(i, times[i - 1], times[i], c * scale)
    t.add("total", times[0], times[-1], res.strike * scale)
    return [t], f"K = {res.strike * scale:.10g} (step-halving error {res.error_estimate:.2g})"


def cmd_compare(job: JobConfig) -> tuple[list[_Table], str]:
    t = _Table("compare", ["beta_q[1/yr]", "paths[count]", "mc_strike[log-return^2]",
                           "mc_stderr[log-return^2]", "analytic_strike[log-return^2]",
                           "rel_diff[1]"])
    betas = job.beta_sweep or (None,)
    scale = 1.0 / job.contract.maturity if job.annualize else 1.0
    last = ""
    for beta in betas:
        jb = job if beta is None else replace(job, model={**job.model, "beta": beta})
        p = jb.forward()
        analytic = fair_strike(jb.contract, p, jb.conv, h=jb.step, workers=jb.workers).strike * scale
        if not jb.ladder:
            t.add(p.beta, 0, math.nan, math.nan, analytic, math.nan)
        for n in jb.ladder:
            est = mc_fair_strike(jb.contract, p, replace(jb.sim, paths=n), jb.conv.mode)
            mc, se = est.mean * scale, est.stderr * scale
            rel = (mc - analytic) / analytic
            t.add(p.beta, n, mc, se, analytic, rel)
            last = f"analytic {analytic:.8g} vs MC {mc:.8g} +- {se:.2g} at {n} paths (rel {rel:.2e})"
        if not jb.ladder:
            last = f"analytic {analytic:.8g}"
    return [t], last


def cmd_premium(job: JobConfig) -> tuple[list[_Table], str]:
    p = job.physical(feller=False)
    spec = job.premium
    n = int(round(spec.t_max / spec.t_step))
    grid = np.linspace(0.0, n * spec.t_step, n + 1)
    t = _Table("premium", ["kind", "vartheta[1]", "t[yr]", "premium[1/yr]", "stderr[1/yr]"])
    for v in spec.varthetas:
        rp = replace(job.risk, vartheta=v)
        for ti, val in zip(grid, expected_premium(grid, p, rp, job.vg)):
            t.add("expected", v, ti, val, math.nan)
    tables = [t]
    if spec.sim_paths > 0:
        if spec.sim_paths > 1000:
            raise ConfigError("sim_paths is capped at 1000")
        horizon = math.floor(spec.t_max)
        marks = [float(k) for k in range(1, horizon + 1)]
        paths = _Table("premium-paths", ["path", "vartheta[1]", "t[yr]", "premium[1/yr]"])
        sim_grid = np.arange(0, int(horizon * job.sim.steps_per_year) + 1) / job.sim.steps_per_year
        sim_grid = sim_grid[:: max(1, job.sim.steps_per_year // 12)]
        # phi is affine in V, so one pass over V serves every vartheta
        v_est = mc_expectations(lambda b: b.V, p, job.sim, float(horizon), marks)
        block = sample_paths(p, replace(job.sim, chunk_size=max(job.sim.chunk_size, spec.sim_paths)),
                             float(horizon), sim_grid, spec.sim_paths)
        for v in spec.varthetas:
            rp = replace(job.risk, vartheta=v)
            jump = float(equity_premium(0.0, rp, job.vg))
            for k, est in zip(marks, v_est):
                t.add("mc_mean", v, k, v * est.mean + jump, v * est.stderr)
            phi = equity_premium(block.V, rp, job.vg)
            for j in range(spec.sim_paths):
                for ti, val in zip(block.times, phi[j]):
                    paths.add(j, v, ti, val)
        tables.append(paths)
    return tables, f"{len(spec.varthetas)} expected-premium curves on [0, {grid[-1]:g}] yr"


def cmd_bond(job: JobConfig) -> tuple[list[_Table], str]:
    q = job.risk_neutral()
    t = _Table("bond", ["T[yr]", "A[1]", "B[yr]", "P[1]", "mc_P[1]", "mc_stderr[1]", "rel_diff[1]"])
    spec = job.bond
    for T in spec.maturities:
        bc = bond_coefficients(0.0, T, q)
        price = bc.A * math.exp(-bc.B * q.r0)
        mc = se = rel = math.nan
        if spec.mc_paths > 0 and T > 0.0:
            cfg = replace(job.sim, paths=spec.mc_paths, steps_per_year=spec.mc_steps_per_year)
            est = mc_expectation(lambda b: np.exp(-b.int_r[:, -1]), q, cfg, T)
            mc, se, rel = est.mean, est.stderr, (est.mean - price) / price
        t.add(T, bc.A, bc.B, price, mc, se, rel)
    return [t], f"{len(spec.maturities)} maturities"


def cmd_simulate(job: JobConfig) -> tuple[list[_Table], str]:
    p = job.forward()
    T = job.contract.maturity
    functionals = {
        "X_T[log-price]": lambda b: b.X[:, -1],
        "S_T[price]": lambda b: np.exp(b.X[:, -1]),
        "V_T[1/yr]": lambda b: b.V[:, -1],
        "r_T[1/yr]": lambda b: b.r[:, -1],
        "int_r[1]": lambda b: b.int_r[:, -1],
    }
    t = _Table("simulate", ["quantity", "mean", "stderr", "paths[count]"])
    ests = mc_expectations(lambda b: np.column_stack([f(b) for f in functionals.values()]),
                           p, job.sim, T, mode=job.conv.mode)
    for name, est in zip(functionals, ests):
        t.add(name, est.mean, est.stderr, est.paths)
    tables = [t]
    if job.dump_paths > 0:
        count = min(job.dump_paths, job.sim.paths)
        cfg = replace(job.sim, chunk_size=max(job.sim.chunk_size, count))
        block = sample_paths(p, cfg, T, job.contract.times, count, job.conv.mode)
        d = _Table("simulate-paths", ["path", "t[yr]", "X[log-price]", "V[1/yr]", "r[1/yr]"])
        for j in range(count):
            for k, ti in enumerate(block.times):
                d.add(j, ti, block.X[j, k], block.V[j, k], block.r[j, k])
        tables.append(d)
    return tables, f"{job.sim.paths} paths, {int(round(T * job.sim.steps_per_year))} steps"


def cmd_fit_abc(job: JobConfig) -> tuple[list[_Table], str]:
    p = job.forward()
    t = _Table("fit-abc", ["process", "a[sqrt(1/yr)]", "b[sqrt(1/yr)]", "c[1/yr]",
                           "omega1_t1[sqrt(1/yr)]", "exact_t1[sqrt(1/yr)]"])
    for name, spec in (("variance", CirMomentSpec.variance(p)), ("rate", CirMomentSpec.rate(p))):
        fit = fit_abc(spec, job.conv.b_convention)
        t.add(name, fit.a, fit.b, fit.c, sqrt_expectation_omega1(1.0, spec),
              sqrt_expectation_exact(1.0, spec))
    return [t], "fits for the variance and rate factors"


COMMANDS = {
    "price": cmd_price,
    "compare": cmd_compare,
    "premium": cmd_premium,
    "bond": cmd_bond,
    "simulate": cmd_simulate,
    "fit-abc": cmd_fit_abc,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="varswap", description="Variance swap pricing engine")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="INI job file (default: built-in reference set)")
    ap.add_argument("--seed", type=int, help="override [mc] seed")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--mode", choices=("partial", "full"))
    ap.add_argument("--nesting", choices=("absolute", "paper_literal"))
    ap.add_argument("--annualize", action="store_true", help="divide strikes by the maturity")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _apply_overrides(job: JobConfig, args) -> JobConfig:
    conv = job.conv
    if args.mode:
        conv = replace(conv, mode=args.mode)
    if args.nesting:
        conv = replace(conv, nesting=args.nesting)
    sim = replace(job.sim, seed=args.seed) if args.seed is not None else job.sim
    return replace(job, conv=conv, sim=sim, annualize=job.annualize or args.annualize)


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr)
    try:
        job = load_config(args.config) if args.config else parse_config(DEFAULT_CONFIG)
        job = _apply_overrides(job, args)
        tables, summary = COMMANDS[args.command](job)
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 3
    buf = io.StringIO()
    for k, table in enumerate(tables):
        if k:
            buf.write("\n")
        table.write(buf)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    print(f"{args.command}: {summary}", file=stderr)
    return 0


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
