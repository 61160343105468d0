import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varswap.equilibrium import (
    equity_premium,
    expected_premium,
    hjb_residuals,
    multistart_roots,
    scan_roots,
    solve_hjb,
)
from varswap.errors import ValidationError
from varswap.levy import premium_jump_integral
from varswap.params import RiskPrices, premium_example


@pytest.mark.parametrize("vartheta", [0.5, 1.5, 2.0, 3.0])
def test_residuals_small(pp, vartheta):
    rp = RiskPrices(vartheta=vartheta)
    sol = solve_hjb(pp, rp)
    assert sol.residual <= 1e-10
    res = hjb_residuals(sol.I, sol.K, sol.M, pp, rp, sol.gamma)
    assert np.max(np.abs(res)) <= 1e-10


def test_no_jumps_gamma_is_minus_delta(pp):
    rp = RiskPrices(vartheta=2.0, delta=0.07)
    sol = solve_hjb(pp.replace(jumps=None), rp)
    assert sol.gamma == -0.07
    assert sol.residual <= 1e-10


@pytest.mark.parametrize("vartheta", [0.5, 2.0, 3.0])
def test_multistart_agreement(pp, vartheta):
    rp = RiskPrices(vartheta=vartheta)
    sol = solve_hjb(pp, rp)
    hits = [root for _, root in multistart_roots(pp, rp)
            if np.allclose(root, (sol.I, sol.K, sol.M), atol=1e-6)]
    assert len(hits) >= 2
    for root in hits:
        assert np.max(np.abs(np.subtract(root, (sol.I, sol.K, sol.M)))) <= 1e-8


@pytest.mark.parametrize("vartheta", [0.5, 1.5, 2.0, 3.0])
def test_selected_root_found_by_independent_scan(pp, vartheta):
    rp = RiskPrices(vartheta=vartheta)
    sol = solve_hjb(pp, rp)
    roots = scan_roots(pp, rp, sol.gamma)
    assert any(np.max(np.abs(np.subtract(r, (sol.I, sol.K, sol.M)))) <= 1e-8 for r in roots)


def test_gamma_convention_propagates(pp):
    rp = RiskPrices(vartheta=2.0)
    a = solve_hjb(pp, rp, convention="printed")
    b = solve_hjb(pp, rp, convention="corrected")
    assert a.gamma != b.gamma
    assert b.residual <= 1e-10


def test_premium_formula(pp):
    rp = RiskPrices(vartheta=2.0)
    jump = premium_jump_integral(2.0, pp.jumps)
    assert equity_premium(0.04, rp, pp.jumps) == pytest.approx(2.0 * 0.04 + jump, rel=1e-15)
    assert equity_premium(0.0, rp, pp.jumps) == jump
    assert equity_premium(0.04, rp, pp.jumps, I=0.5, rho=-0.3, sigma=0.2) == pytest.approx(
        (2.0 + 0.2 * 0.3 * 0.5) * 0.04 + jump)
    tiny = RiskPrices(vartheta=1e-9)
    assert abs(equity_premium(0.04, tiny, pp.jumps)) < 1e-9


def test_expected_premium_endpoints(pp):
    rp = RiskPrices(vartheta=2.0)
    jump = premium_jump_integral(2.0, pp.jumps)
    assert expected_premium(0.0, pp, rp) == pytest.approx(2.0 * pp.V0 + jump, rel=1e-15)
    assert abs(expected_premium(100.0, pp, rp) - (2.0 * pp.theta + jump)) <= 1e-8


def test_expected_premium_needs_zero_rho(pp):
    with pytest.raises(ValidationError):
        expected_premium(1.0, pp.replace(rho=-0.3), RiskPrices())


def test_expected_premium_increasing_in_vartheta(pp):
    t = np.linspace(0, 5, 101)
    curves = [expected_premium(t, pp, RiskPrices(vartheta=v)) for v in (0.5, 1.5, 2.0, 3.0)]
    for lo, hi in zip(curves, curves[1:]):
        assert np.all(hi > lo)


@settings(max_examples=30)
@given(st.floats(0.005, 0.2), st.floats(0.005, 0.2), st.floats(0.5, 3.0).filter(lambda v: v != 1.0))
def test_expected_premium_monotone_in_time(v0, theta, vartheta):
    p = premium_example(V0=v0, theta=theta)
    t = np.linspace(0, 10, 201)
    diffs = np.diff(expected_premium(t, p, RiskPrices(vartheta=vartheta)))
    direction = np.sign(theta - v0)
    assert np.all(diffs * direction >= -1e-15)


@pytest.mark.slow
def test_expected_premium_vs_monte_carlo(pp):
    from varswap.montecarlo import SimConfig, mc_expectation
    rp = RiskPrices(vartheta=2.0)
    est = mc_expectation(lambda b: equity_premium(b.V[:, -1], rp, pp.jumps), pp,
                         SimConfig(paths=100_000, seed=7), 1.0)
    assert abs(est.mean / expected_premium(1.0, pp, rp) - 1) <= 5e-3
