"""Unit and property tests for the saddle-point capacity module.

Frozen reference numbers were computed with tests/highprec_oracle.py
(mpmath, 50 digits, bisection on the division-free stationarity residual)
before the package solver was written; a sample of loads is also checked
against the oracle live.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import highprec_oracle as oracle
from cdma_capacity import (
    DEFAULT_GRID,
    ConvergenceError,
    DomainError,
    GridSpec,
    SolverConfig,
    capacity,
    g_gradient,
    g_value,
    gaussian_tail,
    q_ratio,
    solve_saddle,
    sweep,
)

# mpmath oracle values, 50-digit computation rounded to double.
A_STAR = {
    0.05: 1.0000040501433947,
    0.1: 1.0008547108326875,
    0.5: 1.1376496685127005,
    1.0: 1.4174911413163657,
    2.0: 2.0296335024719706,
    10.0: 7.099394502434388,
    100.0: 64.38939442614613,
}
BITS = {
    0.05: 0.9999944135995423,
    0.1: 0.9988677378432851,
    0.5: 0.8715683904625542,
    1.0: 0.7164266431298841,
    2.0: 0.5373617019268183,
    10.0: 0.20964799115718142,
    100.0: 0.03721631857310723,
}
T_STAR_1 = -0.8399236756923727
NATS_1 = 0.4965891077635053
Q_AT_MINUS_1 = 0.8413447460685429
Q_RATIO_AT_0 = -0.7978845608028654  # = -sqrt(2/pi)
Q_RATIO_AT_MINUS_1 = -0.28759997093917836
G_1_0_01 = 0.6923641729604884
DGDB_1_1_1 = 0.20211543919713464


class TestGaussianTail:
    def test_zero_is_half(self):
        assert gaussian_tail(0.0) == 0.5

    def test_minus_one(self):
        assert gaussian_tail(-1.0) == pytest.approx(Q_AT_MINUS_1, abs=1e-15)

    def test_far_tail_bound(self):
        assert gaussian_tail(10.0) < 1e-23

    def test_stable_out_to_30(self):
        assert 0.0 < gaussian_tail(30.0) < 1e-196
        assert gaussian_tail(-30.0) == pytest.approx(1.0, abs=1e-15)

    def test_symmetry_identity_bulk(self):
        rng = np.random.default_rng(1)
        xs = rng.uniform(-30.0, 30.0, size=10_000)
        worst = max(abs(gaussian_tail(x) + gaussian_tail(-x) - 1.0) for x in xs)
        assert worst < 1e-13

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            gaussian_tail(bad)


class TestQRatio:
    def test_at_zero(self):
        assert q_ratio(0.0) == pytest.approx(Q_RATIO_AT_0, abs=1e-15)
        assert q_ratio(0.0) == pytest.approx(-2.0 * math.exp(0.0) / math.sqrt(2 * math.pi))

    def test_at_minus_one(self):
        assert q_ratio(-1.0) == pytest.approx(Q_RATIO_AT_MINUS_1, abs=1e-15)

    def test_deep_negative_tail_vanishes(self):
        assert q_ratio(-20.0) < 0.0
        assert abs(q_ratio(-20.0)) < 1e-80

    def test_always_negative(self):
        # below t ~ -37.6 the value drops under the smallest subnormal; the
        # correctly rounded result there is -0.0, sign preserved
        for t in np.linspace(-37, 40, 401):
            assert q_ratio(float(t)) < 0.0
        assert math.copysign(1.0, q_ratio(-40.0)) == -1.0

    def test_branches_agree_at_switch(self):
        # the scaled-erfc form (used for t >= 8) against the direct
        # quotient, evaluated at the same argument
        direct = -math.exp(-0.5 * 64.0) / math.sqrt(2 * math.pi) / gaussian_tail(8.0)
        assert q_ratio(8.0) == pytest.approx(direct, rel=1e-12)

    def test_large_argument_asymptote(self):
        # -phi(t)/Q(t) ~ -(t + 1/t) far in the upper tail
        t = 50.0
        assert q_ratio(t) == pytest.approx(-(t + 1.0 / t), rel=1e-3)

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            q_ratio(math.nan)


class TestGValue:
    @pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 3.0, 42.0])
    def test_closed_form_at_b_equal_one(self, beta):
        # t = 0 there, so the tail term vanishes and g = 1/(2 beta)
        assert g_value(1.0, 1.0, beta) == pytest.approx(1.0 / (2.0 * beta), rel=1e-14)

    def test_at_saddle_for_unit_load(self):
        assert g_value(A_STAR[1.0], 0.0, 1.0) == pytest.approx(NATS_1, abs=1e-13)

    def test_direct_evaluation_small_load(self):
        assert g_value(1.0, 0.0, 0.1) == pytest.approx(G_1_0_01, abs=1e-14)

    def test_matches_oracle_formula(self):
        for a, b, beta in [(2.0, 0.3, 0.7), (0.4, -1.2, 3.0), (5.0, 0.9, 0.2)]:
            want = float(oracle.rate_value(a, b, beta))
            assert g_value(a, b, beta) == pytest.approx(want, rel=1e-13)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            g_value(0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            g_value(-1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            g_value(1.0, 0.0, 0.0)
        with pytest.raises(DomainError):
            g_value(1.0, math.nan, 1.0)


def _central_difference(a, b, beta, step=1e-6):
    da = (g_value(a + step, b, beta) - g_value(a - step, b, beta)) / (2 * step)
    db = (g_value(a, b + step, beta) - g_value(a, b - step, beta)) / (2 * step)
    return da, db


class TestGGradient:
    def test_vanishes_at_solved_saddles(self):
        for beta in [0.05, 0.3, 1.0, 4.0, 10.0]:
            sol = solve_saddle(beta)
            grad_a, grad_b = g_gradient(sol.a_star, 0.0, beta)
            assert abs(grad_a) < 1e-8
            assert abs(grad_b) < 1e-8

    def test_b_component_hand_value(self):
        _, grad_b = g_gradient(1.0, 1.0, 1.0)
        assert grad_b == pytest.approx(DGDB_1_1_1, abs=1e-14)

    def test_finite_difference_spot(self):
        analytic = g_gradient(2.0, 0.3, 0.7)
        numeric = _central_difference(2.0, 0.3, 0.7)
        assert analytic[0] == pytest.approx(numeric[0], rel=1e-6)
        assert analytic[1] == pytest.approx(numeric[1], rel=1e-6)

    def test_finite_difference_random_points(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 100:
            a = float(rng.uniform(0.2, 5.0))
            b = float(rng.uniform(-2.0, 2.0))
            beta = float(rng.uniform(0.1, 10.0))
            if abs((b - 1.0) / math.sqrt(a * beta)) > 6.0:
                continue  # tail too thin for a meaningful relative FD check
            analytic = g_gradient(a, b, beta)
            numeric = _central_difference(a, b, beta)
            for got, want in zip(analytic, numeric):
                assert math.isclose(got, want, rel_tol=1e-6, abs_tol=1e-9)
            checked += 1


class TestSolverConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tolerance": 0.0},
            {"tolerance": -1e-9},
            {"max_iterations": 0},
            {"initial_a": 0.0},
            {"initial_a": -2.0},
            {"damping": 0.0},
            {"damping": 1.5},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(DomainError):
            SolverConfig(**kwargs)


class TestSolveSaddle:
    def test_vanishing_load_limit(self):
        sol = solve_saddle(0.001)
        assert 1.0 <= sol.a_star < 1.0001

    def test_unit_load_reference(self):
        sol = solve_saddle(1.0)
        assert sol.a_star == pytest.approx(1.41748, abs=5e-4)  # coarse published digits
        assert sol.t_star == pytest.approx(-0.83999, abs=3e-4)
        assert sol.a_star == pytest.approx(A_STAR[1.0], abs=1e-10)
        assert sol.t_star == pytest.approx(T_STAR_1, abs=1e-10)
        assert sol.b_star == 0.0

    def test_heavy_load_reference(self):
        sol = solve_saddle(100.0)
        assert sol.a_star == pytest.approx(64.4, abs=0.5)
        assert sol.a_star == pytest.approx(A_STAR[100.0], rel=1e-10)

    def test_oracle_agreement_across_loads(self):
        for beta in [0.02, 0.17, 0.9, 3.3, 7.7, 23.0, 60.0]:
            want = float(oracle.solve_a(beta))
            got = solve_saddle(beta).a_star
            assert got == pytest.approx(want, rel=1e-9)

    def test_deterministic(self):
        assert solve_saddle(2.5) == solve_saddle(2.5)
        cfg = SolverConfig(tolerance=1e-10, damping=0.7)
        assert solve_saddle(2.5, cfg) == solve_saddle(2.5, cfg)

    def test_a_star_at_least_one(self):
        for beta in DEFAULT_GRID.values():
            assert solve_saddle(float(beta)).a_star >= 1.0

    def test_budget_exhaustion_raises_with_state(self):
        with pytest.raises(ConvergenceError) as err:
            solve_saddle(1.0, SolverConfig(max_iterations=2, tolerance=1e-300))
        assert err.value.beta == 1.0
        assert err.value.iterations == 2
        assert math.isfinite(err.value.last_a)

    @pytest.mark.parametrize("beta", [0.0, -1.0, math.nan, math.inf])
    def test_bad_load_rejected(self, beta):
        with pytest.raises(DomainError):
            solve_saddle(beta)


class TestCapacity:
    def test_small_load(self):
        sol = capacity(0.1)
        assert sol.capacity_bits == pytest.approx(0.9989, abs=1e-3)
        assert sol.capacity_bits == pytest.approx(BITS[0.1], abs=1e-12)

    def test_unit_load(self):
        sol = capacity(1.0)
        assert sol.capacity_bits == pytest.approx(0.7165, abs=1e-3)
        assert sol.capacity_bits == pytest.approx(BITS[1.0], abs=1e-12)
        assert sol.capacity_nats == pytest.approx(NATS_1, abs=1e-12)

    def test_heavy_load(self):
        sol = capacity(100.0)
        assert sol.capacity_bits == pytest.approx(0.037, abs=0.01)
        assert sol.capacity_bits == pytest.approx(BITS[100.0], abs=1e-12)

    def test_nats_equal_rate_function_at_saddle(self):
        for beta in [0.07, 0.4, 1.0, 6.0, 50.0]:
            sol = capacity(beta)
            assert abs(sol.capacity_nats - g_value(sol.a_star, sol.b_star, beta)) < 1e-12
            assert sol.capacity_bits == sol.capacity_nats / math.log(2.0)

    @given(st.floats(min_value=0.01, max_value=80.0))
    @settings(max_examples=60, deadline=None)
    def test_bits_in_unit_interval(self, beta):
        sol = capacity(beta)
        assert 0.0 < sol.capacity_bits <= 1.0


class TestSweep:
    def test_reference_points(self):
        curve = sweep([0.1, 1.0, 10.0])
        got = curve.capacity_bits
        assert got[0] == pytest.approx(0.9989, abs=1e-3)
        assert got[1] == pytest.approx(0.7165, abs=1e-3)
        assert got[2] == pytest.approx(0.196, abs=0.02)
        for beta, bits in zip([0.1, 1.0, 10.0], got):
            assert bits == pytest.approx(BITS[beta], abs=1e-10)

    def test_single_point_matches_capacity(self):
        assert sweep([1.0]).solutions[0] == capacity(1.0)

    def test_reversed_grid_matches_pointwise(self):
        fwd = sweep([0.1, 0.7, 2.0, 9.0])
        rev = sweep([9.0, 2.0, 0.7, 0.1])
        for s_f, s_r in zip(fwd.solutions, reversed(rev.solutions)):
            assert s_f.beta == s_r.beta
            assert s_f.a_star == pytest.approx(s_r.a_star, abs=1e-10)
            assert s_f.capacity_bits == pytest.approx(s_r.capacity_bits, abs=1e-12)

    def test_warm_start_immaterial(self):
        grid = DEFAULT_GRID.values()
        warm = sweep(grid, warm_start=True)
        cold = sweep(grid, warm_start=False)
        assert np.allclose(warm.capacity_bits, cold.capacity_bits, atol=1e-12, rtol=0)

    def test_default_grid_invariants(self):
        curve = sweep(DEFAULT_GRID)
        assert not curve.failures
        betas = curve.betas
        assert np.all(np.diff(betas) > 0)
        assert np.all(np.diff(curve.capacity_bits) <= 0)
        a_stars = np.array([s.a_star for s in curve.solutions])
        assert np.all(np.diff(a_stars) >= 0)
        for s in curve.solutions:
            assert abs(s.grad_a) < 1e-8 and abs(s.grad_b) < 1e-8

    def test_empty_grid_rejected(self):
        with pytest.raises(DomainError):
            sweep([])

    def test_grid_spec_values(self):
        grid = GridSpec(0.1, 10.0, 3, log=True)
        assert np.allclose(grid.values(), [0.1, 1.0, 10.0])
        lin = GridSpec(1.0, 2.0, 5, log=False)
        assert np.allclose(lin.values(), [1.0, 1.25, 1.5, 1.75, 2.0])
        with pytest.raises(DomainError):
            GridSpec(0.0, 1.0, 10)
        with pytest.raises(DomainError):
            GridSpec(2.0, 1.0, 10)
        with pytest.raises(DomainError):
            GridSpec(1.0, 2.0, 0)
