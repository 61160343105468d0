import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varswap.affine import AffineCoefficients, solve_leg
from varswap.errors import StencilOutsideAdmissibleRegion, ValidationError
from varswap.levy import VGParams
from varswap.options import Conventions
from varswap.params import PREMIUM_VG, reference_params
from varswap.pricer import (
    SwapContract,
    admissible_floor,
    bell_polynomial,
    continuous_limit_reference,
    derivative_at_zero_minus,
    fair_strike,
    one_sided_weights,
    period_exponent,
    period_mgf,
    stencil,
)


def test_contract_validation():
    with pytest.raises(ValidationError):
        SwapContract(1.0, 0)
    with pytest.raises(ValidationError):
        SwapContract(1.0, 2, grid=(0.0, 0.7, 0.5))
    with pytest.raises(ValidationError):
        SwapContract(1.0, 2, grid=(0.0, 0.5, 0.9))
    c = SwapContract(1.0, 3, grid=(0.0, 0.2, 0.5, 1.0))
    np.testing.assert_allclose(c.dt, [0.2, 0.3, 0.5])


def test_one_sided_weights_exact_on_polynomials():
    w = one_sided_weights(2, stencil(2))
    x = stencil(2)
    for k in range(len(x)):
        expect = 2.0 if k == 2 else 0.0
        assert float(w @ x**k) == pytest.approx(expect, abs=1e-10)


def test_derivative_example():
    g = lambda w: math.exp(0.3 * w * w - 0.1 * w)
    val, err = derivative_at_zero_minus(g, 2, 1e-4)
    assert val == pytest.approx(0.61, abs=1e-6)
    assert err < 1e-6
    assert derivative_at_zero_minus(lambda w: 1.0, 1)[0] == 0.0
    assert derivative_at_zero_minus(lambda w: 1.0, 3)[0] == pytest.approx(0.0, abs=1e-9)


def test_stencil_admissibility():
    with pytest.raises(StencilOutsideAdmissibleRegion):
        derivative_at_zero_minus(math.exp, 2, 1.0, lower_bound=-2.0)
    p = reference_params()
    with pytest.raises(StencilOutsideAdmissibleRegion):
        fair_strike(SwapContract(1.0, 4), p, h=abs(admissible_floor(p)))


def test_bell_polynomials():
    assert bell_polynomial([2.0]) == 2.0
    assert bell_polynomial([2.0, 3.0]) == 3.0 + 4.0
    assert bell_polynomial([1.0, 2.0, 3.0]) == pytest.approx(3 + 3 * 2 * 1 + 1)


def test_period_mgf_trivial_cases(tp):
    c = SwapContract(1.0, 4)
    for i in range(1, 5):
        assert period_mgf(i, 0.0, c, tp) == 1.0
    inner = solve_leg(0.0, 0.25, AffineCoefficients.terminal(-0.2), tp).coeffs
    expect = math.exp(inner.C * tp.V0 + inner.D * tp.r0 + inner.E)
    assert period_mgf(1, -0.2, c, tp) == pytest.approx(expect, rel=1e-9)
    with pytest.raises(ValidationError):
        period_exponent(5, -0.1, c, tp)


def test_step_halving_self_consistency(tp):
    res = fair_strike(SwapContract(1.0, 12), tp)
    rel = np.abs(res.contributions - res.halved_contributions) / res.contributions
    assert np.all(rel <= 1e-6)
    assert res.error_estimate / res.strike <= 1e-6


def test_strike_structure(tp):
    res = fair_strike(SwapContract(1.0, 12, notional=3.0), tp)
    assert res.strike == pytest.approx(3.0 * res.contributions.sum() / 3.0 * 1.0, rel=1e-15)
    assert np.all(res.contributions >= -1e-10)
    assert res.periods == 12


def test_decreasing_in_sampling_frequency(tp):
    strikes = [fair_strike(SwapContract(1.0, n), tp).strike for n in (4, 12, 52)]
    assert strikes[0] > strikes[1] > strikes[2]


def test_increasing_in_long_run_rate(tp):
    strikes = [fair_strike(SwapContract(1.0, 12), tp.replace(beta=b)).strike for b in (0.03, 0.05, 0.07)]
    assert strikes[0] < strikes[1] < strikes[2]


@settings(max_examples=8)
@given(st.floats(0.1, 1e4))
def test_linear_in_notional(na):
    p = reference_params()
    one = fair_strike(SwapContract(1.0, 4), p).strike
    assert fair_strike(SwapContract(1.0, 4, notional=na), p).strike == pytest.approx(na * one, rel=1e-12)


def test_nesting_readings_agree(tp):
    c = SwapContract(1.0, 12)
    a = fair_strike(c, tp).strike
    b = fair_strike(c, tp, Conventions(nesting="paper_literal")).strike
    assert abs(a - b) / a <= 5e-3


def test_higher_moments(tp):
    c2 = SwapContract(1.0, 4, moment=2)
    assert fair_strike(c2, tp).strike == fair_strike(SwapContract(1.0, 4), tp).strike
    k4 = fair_strike(SwapContract(1.0, 4, moment=4), tp)
    assert k4.strike > 0
    # fourth moment of a one-period Gaussian return dominates 3 * variance^2
    k3 = fair_strike(SwapContract(1.0, 4, moment=3), tp)
    assert math.isfinite(k3.strike)


def test_deterministic_dynamics_identity():
    # sigma, eta and the jumps vanish: each return is Gaussian with mean (r0 - V0/2) dt
    # and variance V0 dt, so E[sum of squares] = N ((r0 - V0/2) dt)^2 + V0 T
    tiny = VGParams(1e-12, 1e-12, 0.01)
    p = reference_params(sigma=1e-12, eta=1e-12, jumps=tiny, V0=0.05, theta=0.05, r0=0.05, beta=0.05)
    k = fair_strike(SwapContract(1.0, 4), p).strike
    assert k == pytest.approx(4 * (0.025 * 0.25) ** 2 + 0.05 * 1.0, abs=1e-6)


def test_continuous_reference():
    p = reference_params(jumps=None, V0=reference_params().theta)
    c = SwapContract(2.0, 10, notional=1.5)
    assert continuous_limit_reference(c, p.replace(maturity=2.0)) == pytest.approx(1.5 * p.theta * 2.0, rel=1e-14)
    assert PREMIUM_VG.second_moment_rate == pytest.approx(1.604e-3)
    pj = reference_params(jumps=PREMIUM_VG, V0=reference_params().theta)
    c1 = SwapContract(1.0, 10)
    assert continuous_limit_reference(c1, pj) - continuous_limit_reference(c1, pj, with_jumps=False) == pytest.approx(1.604e-3)


def test_full_mode_close_to_partial_for_small_cross_correlation(tp):
    c = SwapContract(1.0, 12)
    a = fair_strike(c, tp).strike
    b = fair_strike(c, tp.replace(rho13=0.05, rho23=0.05), Conventions(mode="full")).strike
    assert abs(a - b) / a < 1e-3


def test_parallel_periods_give_identical_result(tp):
    c = SwapContract(1.0, 8)
    a = fair_strike(c, tp)
    b = fair_strike(c, tp, workers=4)
    np.testing.assert_array_equal(a.contributions, b.contributions)


def test_contract_beyond_forward_maturity(tp):
    with pytest.raises(ValidationError):
        fair_strike(SwapContract(2.0, 4), tp)


@pytest.mark.slow
def test_period_mgf_vs_monte_carlo(tp):
    from varswap.montecarlo import SimConfig, mc_expectation
    c = SwapContract(1.0, 4)
    w = -1e-3
    analytic = period_mgf(2, w, c, tp)
    est = mc_expectation(lambda b: np.exp(w * (b.X[:, 2] - b.X[:, 1])), tp,
                         SimConfig(paths=100_000, seed=9), 1.0, c.times)
    assert abs(est.mean - analytic) / analytic <= 5e-3
