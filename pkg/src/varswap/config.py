"""INI job configuration.

Sections and keys (unknown sections or keys are rejected):

[model]     measure = risk_neutral | physical, kappa, theta, sigma, alpha, beta,
            eta, rho, rho13, rho23, S0, V0, r0, mu, vg_drift, vg_vol, vg_rate
[risk]      lambda1, lambda2, vartheta, delta
[contract]  maturity, periods, notional, moment
[run]       mode, nesting, gamma_convention, b_convention,
            d_quadratic_coefficient, x_drift_sign, annualize, step, workers
[mc]        paths, steps_per_year, seed, scheme, antithetic, chunk_size,
            workers, ladder, dump_paths
[premium]   varthetas, t_max, t_step, sim_paths
[bond]      maturities, mc_paths, mc_steps_per_year
[compare]   beta_sweep

Omitting all three vg_* keys switches the jumps off.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .equilibrium import solve_hjb
from .errors import ConfigError
from .levy import VGParams
from .montecarlo import SimConfig
from .options import Conventions
from .params import (
    ForwardParams,
    PhysicalParams,
    RiskNeutralParams,
    RiskPrices,
    to_forward,
    to_risk_neutral,
    validate,
)
from .pricer import SwapContract

_FLOAT, _INT, _BOOL, _STR, _LIST = "float", "int", "bool", "str", "list"

_SCHEMA: dict[str, dict[str, str]] = {
    "model": {"measure": _STR, "kappa": _FLOAT, "theta": _FLOAT, "sigma": _FLOAT,
              "alpha": _FLOAT, "beta": _FLOAT, "eta": _FLOAT, "rho": _FLOAT,
              "rho13": _FLOAT, "rho23": _FLOAT, "S0": _FLOAT, "V0": _FLOAT, "r0": _FLOAT,
              "mu": _FLOAT, "vg_drift": _FLOAT, "vg_vol": _FLOAT, "vg_rate": _FLOAT},
    "risk": {"lambda1": _FLOAT, "lambda2": _FLOAT, "vartheta": _FLOAT, "delta": _FLOAT},
    "contract": {"maturity": _FLOAT, "periods": _INT, "notional": _FLOAT, "moment": _INT},
    "run": {"mode": _STR, "nesting": _STR, "gamma_convention": _STR, "b_convention": _STR,
            "d_quadratic_coefficient": _STR, "x_drift_sign": _STR, "annualize": _BOOL,
            "step": _FLOAT, "workers": _INT},
    "mc": {"paths": _INT, "steps_per_year": _INT, "seed": _INT, "scheme": _STR,
           "antithetic": _BOOL, "chunk_size": _INT, "workers": _INT, "ladder": _LIST,
           "dump_paths": _INT},
    "premium": {"varthetas": _LIST, "t_max": _FLOAT, "t_step": _FLOAT, "sim_paths": _INT},
    "bond": {"maturities": _LIST, "mc_paths": _INT, "mc_steps_per_year": _INT},
    "compare": {"beta_sweep": _LIST},
}

MAX_DUMP_PATHS = 1000


@dataclass
class PremiumSpec:
    varthetas: tuple[float, ...] = (1.5, 2.0, 3.0)
    t_max: float = 5.0
    t_step: float = 0.05
    sim_paths: int = 0


@dataclass
class BondSpec:
    maturities: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0)
    mc_paths: int = 0
    mc_steps_per_year: int = 500


@dataclass
class JobConfig:
    measure: str
    model: dict
    vg: VGParams | None
    risk: RiskPrices
    contract: SwapContract
    conv: Conventions
    sim: SimConfig
    annualize: bool = False
    step: float | None = None
    workers: int = 1
    ladder: tuple[int, ...] = (10_000, 50_000, 200_000)
    dump_paths: int = 0
    premium: PremiumSpec = field(default_factory=PremiumSpec)
    bond: BondSpec = field(default_factory=BondSpec)
    beta_sweep: tuple[float, ...] = ()

    # parameter tiers -------------------------------------------------------

    def physical(self, feller: bool = True) -> PhysicalParams:
        if self.measure != "physical":
            raise ConfigError("this command needs [model] measure = physical")
        return validate(PhysicalParams(jumps=self.vg, **self.model), feller=feller)

    def risk_neutral(self) -> RiskNeutralParams:
        if self.measure == "risk_neutral":
            m = {k: v for k, v in self.model.items() if k != "mu"}
            return validate(RiskNeutralParams(jumps=self.vg, **m))
        p = self.physical()
        rp = self.risk
        if self.conv.mode == "partial":
            sol = solve_hjb(p, rp, self.vg, self.conv.gamma_convention)
            rp = replace(rp, I=sol.I, K=sol.K, M=sol.M)
        return to_risk_neutral(p, rp, self.conv.mode)

    def forward(self, maturity: float | None = None) -> ForwardParams:
        return to_forward(self.risk_neutral(), self.contract.maturity if maturity is None else maturity)


def _parse(kind: str, raw: str, where: str):
    try:
        if kind == _FLOAT:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("not finite")
            return v
        if kind == _INT:
            return int(raw, 0)
        if kind == _BOOL:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError("not a boolean")
        if kind == _LIST:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from None


def parse_config(text: str) -> JobConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep S0, V0 as written
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    data: dict[str, dict] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        data[section] = {}
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            data[section][key] = _parse(_SCHEMA[section][key], raw, f"[{section}] {key}")

    model = dict(data.get("model", {}))
    measure = model.pop("measure", "risk_neutral")
    if measure not in ("risk_neutral", "physical"):
        raise ConfigError(f"measure must be risk_neutral or physical, got {measure!r}")
    required = ("kappa", "theta", "sigma", "alpha", "beta", "eta")
    missing = [k for k in required if k not in model]
    if missing:
        raise ConfigError(f"[model] is missing {', '.join(missing)}")
    vg_keys = [k for k in ("vg_drift", "vg_vol", "vg_rate") if k in model]
    vg = None
    if vg_keys:
        if len(vg_keys) != 3:
            raise ConfigError("give all of vg_drift, vg_vol, vg_rate or none of them")
        vg = VGParams(model.pop("vg_drift"), model.pop("vg_vol"), model.pop("vg_rate"))
    if measure == "risk_neutral" and "mu" in model:
        raise ConfigError("mu is a physical-measure parameter")

    risk = RiskPrices(**data.get("risk", {}))
    c = data.get("contract", {})
    contract = SwapContract(maturity=c.get("maturity", 1.0), periods=c.get("periods", 252),
                            notional=c.get("notional", 1.0), moment=c.get("moment", 2))
    run = dict(data.get("run", {}))
    annualize = run.pop("annualize", False)
    step = run.pop("step", None)
    workers = run.pop("workers", 1)
    conv = Conventions(**run)

    mc = dict(data.get("mc", {}))
    ladder = tuple(int(x) for x in mc.pop("ladder", (10_000, 50_000, 200_000)))
    dump = mc.pop("dump_paths", 0)
    if not 0 <= dump <= MAX_DUMP_PATHS:
        raise ConfigError(f"dump_paths must be in [0, {MAX_DUMP_PATHS}]")
    sim = SimConfig(**mc)

    prem = data.get("premium", {})
    premium = PremiumSpec(**{k: v for k, v in prem.items()})
    bond = BondSpec(**data.get("bond", {}))
    sweep = data.get("compare", {}).get("beta_sweep", ())
    return JobConfig(measure=measure, model=model, vg=vg, risk=risk, contract=contract,
                     conv=conv, sim=sim, annualize=annualize, step=step, workers=workers,
                     ladder=ladder, dump_paths=dump, premium=premium, bond=bond,
                     beta_sweep=sweep)


def load_config(path: str | Path) -> JobConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
