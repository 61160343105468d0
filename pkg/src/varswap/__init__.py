"""Discretely sampled variance swaps under stochastic volatility, stochastic
interest rates and variance-gamma jumps."""

from .affine import AffineCoefficients, fg_cross_check, riccati_C_closed, solve_leg
from .equilibrium import HjbSolution, equity_premium, expected_premium, solve_hjb
from .errors import NumericalError, ValidationError, VarSwapError
from .levy import VGParams, char_exponent, hjb_gamma, jump_term_J, premium_jump_integral
from .montecarlo import McEstimate, SimConfig, mc_expectation, mc_fair_strike, simulate
from .options import Conventions
from .params import (
    ForwardParams,
    PhysicalParams,
    RiskNeutralParams,
    RiskPrices,
    premium_example,
    reference_params,
    to_forward,
    to_risk_neutral,
    validate,
)
from .pricer import StrikeResult, SwapContract, continuous_limit_reference, fair_strike
from .rates import bond_A, bond_B, bond_price

__all__ = [name for name in dir() if not name.startswith("_")]
