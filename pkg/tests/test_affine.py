import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from varswap.affine import (
    AffineCoefficients,
    check_admissible,
    fg_cross_check,
    mgf_value,
    omega_lower_bound,
    riccati_C_closed,
    solve_leg,
)
from varswap.errors import InadmissibleExponent, InvalidWindow, Overflow, ValidationError
from varswap.levy import VGParams
from varswap.moments import CrossMoment
from varswap.options import Conventions
from varswap.params import reference_params

FULL = Conventions(mode="full")


def test_zero_terminal_stays_zero(tp):
    for t0 in (0.0, 0.3, 0.9):
        c = solve_leg(t0, 1.0, AffineCoefficients.terminal(), tp).coeffs
        assert (c.C, c.D, c.E) == (0.0, 0.0, 0.0)
        assert mgf_value(c, 0.3, tp.V0, tp.r0) == 1.0


def test_zero_width_returns_terminal(tp):
    term = AffineCoefficients(-0.2, -0.1, -0.3, 0.7)
    out = solve_leg(0.4, 0.4, term, tp)
    assert out.coeffs == term and out.steps == 0


def test_invalid_windows(tp):
    with pytest.raises(InvalidWindow):
        solve_leg(0.5, 0.2, AffineCoefficients.terminal(-0.1), tp)
    with pytest.raises(InvalidWindow):
        solve_leg(0.0, 2.0, AffineCoefficients.terminal(-0.1), tp)


def test_closed_form_C_basics(tp):
    assert riccati_C_closed(0.0, -0.4, -0.2, tp) == pytest.approx(-0.2, abs=1e-15)
    np.testing.assert_allclose(riccati_C_closed(np.linspace(0, 3, 7), 0.0, 0.0, tp), 0.0, atol=1e-16)


def test_closed_form_C_matches_ode(tp):
    w = -0.5
    rhs = lambda s, c: 0.5 * tp.sigma**2 * c * c + (tp.rho * tp.sigma * w - tp.kappa) * c + 0.5 * (w * w - w)
    sol = solve_ivp(rhs, (0, 1), [0.0], method="DOP853", rtol=1e-13, atol=1e-15)
    assert abs(riccati_C_closed(1.0, w, 0.0, tp) - sol.y[0, -1]) <= 1e-10
    leg = solve_leg(0.0, 1.0, AffineCoefficients.terminal(w), tp, rtol=1e-12, atol=1e-14)
    assert abs(riccati_C_closed(1.0, w, 0.0, tp) - leg.coeffs.C) <= 1e-10


def test_sigma_zero_limit_of_C():
    p = reference_params(sigma=0.0, maturity=3.0)
    w, phi, k = -0.7, -0.3, p.kappa
    for tau in (0.2, 1.0, 3.0):
        expect = math.exp(-k * tau) * phi + 0.5 * (w * w - w) * -math.expm1(-k * tau) / k
        leg = solve_leg(0.0, tau, AffineCoefficients(w, phi, 0, 0), p)
        assert leg.coeffs.C == pytest.approx(expect, abs=1e-9)
        assert riccati_C_closed(tau, w, phi, reference_params(sigma=1e-9)) == pytest.approx(expect, abs=1e-9)
        assert leg.max_residual < 1e-8


def test_fg_trivial_cases(tp):
    assert fg_cross_check(0.0, -0.5, -0.2, tp)[2] == -0.2
    F, G, D = fg_cross_check(0.7, 0.0, 0.0, tp)
    assert G == 0.0 and D == 0.0


def test_fg_matches_leg_reference(tp):
    leg = solve_leg(0.0, 1.0, AffineCoefficients.terminal(-0.5), tp)
    assert abs(fg_cross_check(1.0, -0.5, 0.0, tp)[2] - leg.coeffs.D) <= 1e-8


def random_tuples(n=10, seed=12345):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        kappa, sigma = rng.uniform(0.5, 4), rng.uniform(0.05, 0.6)
        theta = rng.uniform(max(0.02, sigma**2 / (2 * kappa)), 0.3)
        alpha, eta = rng.uniform(0.3, 3), rng.uniform(0.001, 0.2)
        beta = rng.uniform(max(0.01, eta**2 / (2 * alpha)), 0.1)
        p = reference_params(kappa=kappa, theta=theta, sigma=sigma, alpha=alpha, beta=beta, eta=eta,
                   rho=rng.uniform(-0.9, 0.9), V0=rng.uniform(0.01, 0.2), r0=rng.uniform(0.01, 0.1),
                   maturity=rng.uniform(0.5, 3))
        w = rng.uniform(max(omega_lower_bound(p) * 0.9, -3), 0)
        psi = -rng.uniform(0, 0.5)
        out.append((p, w, psi))
    return out


@pytest.mark.parametrize("p,w,psi", random_tuples())
def test_fg_matches_leg_random(p, w, psi):
    T = p.maturity
    leg = solve_leg(0.0, T, AffineCoefficients(w, 0.0, psi, 0.0), p)
    assert abs(fg_cross_check(T, w, psi, p)[2] - leg.coeffs.D) <= 1e-8
    assert leg.max_residual <= 1e-8


def test_residuals_both_modes():
    p = reference_params(rho13=0.3, rho23=0.3)
    term = AffineCoefficients.terminal(-0.4)
    assert solve_leg(0.0, 1.0, term, p).max_residual <= 1e-8
    cm = CrossMoment.from_params(p, FULL)
    assert solve_leg(0.0, 1.0, term, p, FULL, cm).max_residual <= 1e-8


def test_full_mode_needs_cross_moment(tp):
    with pytest.raises(ValidationError):
        solve_leg(0.0, 1.0, AffineCoefficients.terminal(-0.4), tp, FULL)


def test_full_mode_reduces_to_partial_without_cross_correlations(tp):
    term = AffineCoefficients.terminal(-0.4)
    a = solve_leg(0.0, 1.0, term, tp).coeffs
    b = solve_leg(0.0, 1.0, term, tp, FULL, CrossMoment.from_params(tp, FULL)).coeffs
    assert (a.C, a.D) == pytest.approx((b.C, b.D), abs=1e-14)
    assert a.E == pytest.approx(b.E, abs=1e-14)


@given(st.floats(0.0, 1.0))
def test_sign_pattern_for_admissible_omega(frac):
    # for omega < 0 the C forcing (w^2 - w)/2 is positive and the D forcing w negative,
    # so starting from zero C stays >= 0 and D stays <= 0
    p = reference_params()
    w = omega_lower_bound(p) * frac * 0.99
    for t0 in (0.0, 0.5, 0.9):
        c = solve_leg(t0, 1.0, AffineCoefficients.terminal(w), p).coeffs
        assert c.C >= 0.0 and c.D <= 0.0


def test_vectorised_omega_matches_scalar(tp):
    ws = np.array([-0.3, -0.1, 0.0])
    vec = solve_leg(0.2, 1.0, AffineCoefficients.terminal(ws), tp).coeffs
    for k, w in enumerate(ws):
        s = solve_leg(0.2, 1.0, AffineCoefficients.terminal(w), tp).coeffs
        assert vec.C[k] == pytest.approx(s.C, rel=1e-8, abs=1e-14)
        assert vec.E[k] == pytest.approx(s.E, rel=1e-8, abs=1e-14)


def test_admissibility_check(tp):
    check_admissible(-0.5, -0.1, -0.1, tp)
    with pytest.raises(InadmissibleExponent):
        check_admissible(0.1)
    with pytest.raises(InadmissibleExponent):
        check_admissible(omega_lower_bound(tp) * 1.01, p=tp)


def test_mgf_value_arithmetic():
    assert mgf_value(AffineCoefficients(0, 0, 0, 0), 3.0, 0.1, 0.1) == 1.0
    assert mgf_value(AffineCoefficients(1, 0, 0, 0), 0.0, 0.1, 0.1) == 1.0
    assert mgf_value(AffineCoefficients(0, -1, -1, 0.5), 7.0, 0.05, 0.05) == pytest.approx(math.exp(0.4))
    with pytest.raises(Overflow):
        mgf_value(AffineCoefficients(0, 0, 0, 800.0), 0, 0, 0)


def test_jumps_enter_only_through_E(tp):
    term = AffineCoefficients.terminal(-0.3)
    with_j = solve_leg(0.0, 1.0, term, tp).coeffs
    no_j = solve_leg(0.0, 1.0, term, tp.replace(jumps=None)).coeffs
    assert with_j.C == pytest.approx(no_j.C, rel=1e-12)
    assert with_j.D == pytest.approx(no_j.D, rel=1e-12)
    from varswap.levy import jump_term_J
    assert with_j.E - no_j.E == pytest.approx(jump_term_J(-0.3, tp.jumps), rel=1e-8)


@pytest.mark.slow
def test_mgf_vs_monte_carlo(tp):
    from varswap.montecarlo import SimConfig, mc_expectation
    c = solve_leg(0.0, 1.0, AffineCoefficients.terminal(-0.3), tp).coeffs
    analytic = mgf_value(c, math.log(tp.S0), tp.V0, tp.r0)
    est = mc_expectation(lambda b: np.exp(-0.3 * b.X[:, -1]), tp, SimConfig(paths=200_000, seed=5), 1.0)
    assert abs(est.mean - analytic) / analytic <= 5e-3
