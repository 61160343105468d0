import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from varswap.errors import InvalidWindow
from varswap.rates import b_of_tau, bond_A, bond_B, bond_coefficients, bond_price, log_a_of_tau


def test_terminal_values(tp):
    assert bond_B(1.0, 1.0, tp) == 0.0
    assert bond_A(1.0, 1.0, tp) == 1.0
    for r in (0.0, 0.05, 0.3):
        assert bond_price(2.0, 2.0, r, tp) == 1.0


def test_invalid_window(tp):
    with pytest.raises(InvalidWindow):
        bond_B(1.5, 1.0, tp)
    with pytest.raises(InvalidWindow):
        bond_price(0.0, 1.0, -0.01, tp)


def test_deterministic_rate_limit(tp):
    expect = (1 - math.exp(-1.2)) / 1.2
    assert expect == pytest.approx(0.58234, abs=1e-5)
    assert b_of_tau(1.0, 1.2, 1e-6) == pytest.approx(expect, abs=1e-10)
    assert b_of_tau(1.0, 1.2, 0.0) == pytest.approx(expect, rel=1e-15)
    # A in the eta -> 0 limit is exp(-beta (tau - B))
    b = b_of_tau(1.0, 1.2, 0.0)
    assert math.exp(log_a_of_tau(1.0, 1.2, 0.05, 0.0)) == pytest.approx(math.exp(-0.05 * (1 - b)), rel=1e-14)
    assert log_a_of_tau(1.0, 1.2, 0.05, 1e-6) == pytest.approx(log_a_of_tau(1.0, 1.2, 0.05, 0.0), abs=1e-10)


def test_b_matches_its_riccati_ode(tp):
    a, e = tp.alpha, tp.eta
    taus = np.linspace(0, 30, 301)
    sol = solve_ivp(lambda s, y: 1 - a * y - 0.5 * e * e * y * y, (0, 30), [0.0],
                    t_eval=taus, method="DOP853", rtol=1e-13, atol=1e-14)
    closed = np.array([b_of_tau(t, a, e) for t in taus])
    assert np.max(np.abs(closed - sol.y[0])) <= 1e-10


def test_a_matches_its_ode(tp):
    # d ln A / d tau = -alpha beta B
    a, b, e = tp.alpha, tp.beta, tp.eta
    sol = solve_ivp(lambda s, y: [-a * b * b_of_tau(s, a, e)], (0, 10), [0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    assert log_a_of_tau(10.0, a, b, e) == pytest.approx(sol.y[0, -1], rel=1e-10)


def test_a_decreasing_in_beta(tp):
    assert bond_A(0.0, 1.0, tp) > bond_A(0.0, 1.0, tp.replace(beta=0.10))


def test_price_decreasing_in_rate_and_a_at_zero_rate(tp):
    assert bond_price(0.0, 1.0, 0.05, tp) > bond_price(0.0, 1.0, 0.06, tp)
    assert bond_price(0.0, 1.0, 0.0, tp) == bond_A(0.0, 1.0, tp)


def test_a_in_unit_interval(tp):
    for T in (0.1, 1, 5, 30):
        c = bond_coefficients(0.0, T, tp)
        assert 0 < c.A <= 1 and c.B >= 0


def test_bond_pricing_pde(tp):
    a, b, e = tp.alpha, tp.beta, tp.eta
    h, T = 1e-4, 5.0

    def P(t, r):
        return bond_price(t, T, r, tp)

    for t in (0.0, 1.0, 3.0):
        for r in (0.01, 0.05, 0.12):
            tt = max(t, h)
            dt = (P(tt + h, r) - P(tt - h, r)) / (2 * h)
            dr = (P(tt, r + h) - P(tt, r - h)) / (2 * h)
            drr = (P(tt, r + h) - 2 * P(tt, r) + P(tt, r - h)) / h**2
            res = dt + a * (b - r) * dr + 0.5 * e * e * r * drr - r * P(tt, r)
            assert abs(res) <= 1e-8 * P(tt, r)


@given(st.floats(0.05, 5), st.floats(0, 1.0), st.floats(0.0, 20), st.floats(0.001, 5))
def test_b_increasing_and_bounded(alpha, eta, tau, dtau):
    b0, b1 = b_of_tau(tau, alpha, eta), b_of_tau(tau + dtau, alpha, eta)
    assert b1 >= b0 >= 0
    assert b1 <= 1 / alpha + 1e-12
