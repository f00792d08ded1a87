import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import digamma

from renyi_gkl.cf_core import RenyiParams, invariant_density
from renyi_gkl.checks import DERIVATIVE_BATTERY
from renyi_gkl.exceptions import ToleranceNotReachedError
from renyi_gkl.grid import GridFunction, chebyshev_nodes
from renyi_gkl.transfer_op import (
    branch_weight,
    derivative_identity_check,
    derivative_identity_residual,
    inverse_branch,
    pf_apply_grid,
    pf_apply_point,
    pf_iterate,
    pf_lebesgue_apply_point,
    transported_measure,
    v_apply_grid,
    v_apply_point,
)
from renyi_gkl.wirsing import phi_func, v_phi_closed

M_BRUTE = 10**6


def rho_integral(g: GridFunction):
    p = g.params
    return g.with_values(g.values / (p.logK * (g.nodes + p.N - 1))).integral()


def random_positive(seed, N, degree=64):
    """exp of a random low-degree polynomial, sampled on the grid."""
    rng = np.random.default_rng(seed)
    poly = np.polynomial.Polynomial(rng.normal(scale=1.5, size=5))
    return GridFunction.from_function(N, lambda x: np.exp(poly(x)), degree)


class TestBranches:
    @given(st.sampled_from([2, 3, 7]), st.floats(0, 1), st.integers(0, 500))
    def test_weight_positive_and_branch_in_range(self, N, x, k):
        i = N + k
        assert branch_weight(N, i, x) > 0
        u = float(inverse_branch(N, i, x))
        assert 1 - N / i - 1e-15 <= u <= 1 - N / (i + 1) + 1e-15
        assert 0.0 <= u < 1.0

    @given(st.sampled_from([2, 3, 7]), st.floats(0, 1), st.integers(0, 3000))
    def test_telescoping(self, N, x, k):
        I = N + k
        total = math.fsum(float(branch_weight(N, i, x)) for i in range(N, I + 1))
        assert abs(total - (1 - (x + N - 1) / (x + I))) < 1e-13


class TestPfApplyPoint:
    @pytest.mark.parametrize("N", [2, 3, 5, 100])
    def test_constant_one(self, N):
        for x in (0.0, 0.3, 1.0):
            assert abs(pf_apply_point(N, lambda u: np.ones_like(u), x) - 1.0) < 1e-12

    def test_identity_at_zero_oracle(self):
        # P_i(0) (1 - 2/i) = 1/(i(i-1)) - 2/(i^2 (i-1)); with
        # 1/(i^2 (i-1)) = 1/(i-1) - 1/i - 1/i^2 the sum telescopes to pi^2/3 - 3
        closed = math.pi**2 / 3 - 3
        i = np.arange(2, M_BRUTE + 1, dtype=float)
        brute = math.fsum((1.0 / (i * (i - 1)) * (1 - 2 / i))[::-1])
        # remaining tail: exactly 1/M from the first family, 2/M^2 + O(M^-3) from the second
        brute += 1.0 / M_BRUTE - 1.0 / M_BRUTE**2
        assert brute == pytest.approx(closed, abs=1e-15)
        assert pf_apply_point(2, lambda u: u, 0.0) == pytest.approx(closed, abs=1e-12)

    def test_rho_operator_does_not_fix_lebesgue_density(self):
        # under the invariant measure U fixes 1, so nu (non-constant) is not fixed;
        # nu is fixed by the Lebesgue form instead
        nu = lambda u: invariant_density(2, u)  # noqa: E731
        assert abs(pf_apply_point(2, nu, 0.5) - nu(0.5)) > 1e-3

    def test_tolerance_not_reached(self):
        with pytest.raises(ToleranceNotReachedError):
            pf_apply_point(2, lambda u: np.sin(1.0 / (1.0 - u + 1e-300)), 0.3, tol=1e-15, cap=1000)

    def test_bad_x(self):
        with pytest.raises(ValueError):
            pf_apply_point(2, lambda u: u, float("nan"))


class TestLebesgueOperator:
    def test_fixes_invariant_density_example(self):
        nu = lambda u: invariant_density(2, u)  # noqa: E731
        assert abs(pf_lebesgue_apply_point(2, nu, 0.5) - nu(0.5)) < 1e-12

    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_fixes_invariant_density_sup(self, N):
        nu = lambda u: invariant_density(N, u)  # noqa: E731
        xs = np.linspace(0, 1, 100)
        assert max(abs(pf_lebesgue_apply_point(N, nu, x) - nu(x)) for x in xs) < 1e-10

    def test_fixes_density_at_grid_nodes(self):
        tol = 1e-12
        nu = lambda u: invariant_density(3, u)  # noqa: E731
        res = [abs(pf_lebesgue_apply_point(3, nu, x, tol) - nu(x)) for x in chebyshev_nodes(64)]
        assert max(res) < 10 * tol

    def test_conjugate_to_rho_operator(self):
        f = lambda u: np.cos(3 * u) + 2  # noqa: E731
        nu = lambda u: invariant_density(3, u)  # noqa: E731
        for x in (0.0, 0.4, 1.0):
            lhs = pf_apply_point(3, f, x)
            rhs = pf_lebesgue_apply_point(3, lambda u: f(u) * nu(u), x) / nu(x)
            assert lhs == pytest.approx(rhs, abs=1e-11)


class TestGrid:
    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_constant_grid_fixed(self, N):
        out = pf_apply_grid(GridFunction.constant(N, 1.0))
        np.testing.assert_allclose(out.values, 1.0, atol=1e-12)

    def test_matches_pointwise(self):
        f = GridFunction.from_function(2, lambda x: np.exp(-x))
        g = pf_apply_grid(f)
        for j in (0, 10, 32, 64):
            x = f.nodes[j]
            assert g.values[j] == pytest.approx(pf_apply_point(2, f, x), abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_positivity(self, seed):
        for N in (2, 3, 5):
            f = random_positive(seed, N)
            assert np.all(pf_apply_grid(f).values > 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_mass_preservation(self, seed):
        for N in (2, 3, 5):
            f = random_positive(seed, N)
            assert rho_integral(pf_apply_grid(f)) == pytest.approx(rho_integral(f), abs=1e-8)

    def test_iterates_approach_constant(self):
        f = random_positive(11, 2)
        f = f.with_values(f.values / rho_integral(f))
        its = pf_iterate(f, 30)
        dev = [np.max(np.abs(g.values - 1.0)) for g in its]
        assert dev[-1] < 1e-10
        ratios = np.array(dev[11:21]) / np.array(dev[10:20])
        # geometric decay at roughly the Wirsing-type rate for N = 2
        assert np.all((ratios > 0.35) & (ratios < 0.38))

    def test_iterate_list(self):
        f = GridFunction.constant(2, 1.0, degree=8)
        its = pf_iterate(f, 3)
        assert len(its) == 4 and its[0] is f


class TestV:
    def test_zero(self):
        assert v_apply_point(2, lambda u: np.zeros_like(u), 0.4) == 0.0

    def test_constant_one_oracle(self):
        # with g = 1 the branch integral is u(i+1,0) - u(i,0) = 2/(i(i+1))
        i = np.arange(2, M_BRUTE + 1, dtype=float)
        terms = 2 * (i - 1) / (i**3 * (i + 1)) + 2 / ((i - 1) * i**3)
        # tail beyond M: first family ~ 2/i^3 gives 1/M^2, second is O(M^-3)
        brute = -(math.fsum(terms[::-1]) + 1.0 / M_BRUTE**2)
        got = v_apply_point(2, lambda u: np.ones_like(u), 0.0)
        assert got == pytest.approx(brute, abs=1e-12)
        # the same number is -(U id)'(0), by a one-sided difference
        h = 1e-6
        fd = (pf_apply_point(2, lambda u: u, h, 1e-14) - pf_apply_point(2, lambda u: u, 0.0, 1e-14)) / h
        assert -fd == pytest.approx(got, abs=1e-5)

    def test_phi_example_from_rounded_constants(self):
        e, t = 0.8956735, 0.4999967
        closed = e / (t + 1) ** 2
        assert closed == pytest.approx(0.398077, abs=1e-5)
        assert v_phi_closed(3, e, t, 0.0) == pytest.approx(closed, rel=1e-15)
        series = v_apply_point(3, lambda u: phi_func(3, e, t, u), 0.0, 1e-12)
        assert series == pytest.approx(closed, abs=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_sign_flip(self, seed):
        for N in (2, 3, 5):
            g = random_positive(seed, N)
            g = g.with_values(-g.values)
            assert np.all(v_apply_grid(g).values > 0)

    def test_grid_matches_pointwise(self):
        g = GridFunction.from_function(3, np.cos)
        out = v_apply_grid(g)
        for j in (0, 20, 64):
            assert out.values[j] == pytest.approx(v_apply_point(3, np.cos, g.nodes[j]), abs=1e-11)


class TestDerivativeIdentity:
    def test_examples(self):
        assert derivative_identity_check(2, lambda x: x, lambda x: np.ones_like(x), 0.5)
        assert derivative_identity_check(2, lambda x: np.full_like(x, 3.0), lambda x: np.zeros_like(x), 0.5)
        assert derivative_identity_check(3, lambda x: x**2, lambda x: 2 * x, 0.25)

    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_battery(self, N):
        xs = np.linspace(0, 1, 22)[1:-1]
        for _, f, fp in DERIVATIVE_BATTERY:
            for x in xs:
                assert derivative_identity_check(N, f, fp, x, tol=1e-6)

    def test_detects_wrong_derivative(self):
        assert derivative_identity_residual(2, np.sin, np.sin, 0.5) > 1e-3
        assert not derivative_identity_check(2, np.sin, np.sin, 0.5)


class TestTransportedMeasure:
    def uniform_f0(self, N):
        p = RenyiParams(N)
        return GridFunction.from_function(p, lambda x: p.logK * (x + N - 1))

    @pytest.mark.parametrize("N", [2, 3, 7])
    def test_total_mass(self, N):
        assert transported_measure(N, self.uniform_f0(N), 0) == pytest.approx(1.0, abs=1e-14)
        assert transported_measure(N, self.uniform_f0(N), 4) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
    def test_one_step_preimage_lengths(self, x):
        # sum of lengths of (u(i,0), u(i,x)); digamma closed form of the same series
        i = np.arange(2, M_BRUTE + 1, dtype=float)
        brute = math.fsum((2 * x / (i * (x + i)))[::-1]) + 2 * x / M_BRUTE
        closed = 2 * (digamma(x + 1) + np.euler_gamma - x / (1 + x))
        assert brute == pytest.approx(closed, abs=1e-11)
        got = transported_measure(2, self.uniform_f0(2), 1, (0.0, x))
        assert got == pytest.approx(closed, abs=1e-11)

    def test_large_n_tends_to_invariant_cdf(self):
        f0 = self.uniform_f0(2)
        for x in (0.25, 0.5, 0.75):
            g = math.log1p(x) / math.log(2)
            assert transported_measure(2, f0, 40, (0.0, x)) == pytest.approx(g, abs=1e-12)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            transported_measure(2, self.uniform_f0(2), 1, (0.5, 0.2))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.sampled_from([2, 3, 5]))
def test_mass_preserved_pointwise_for_indicator_like_smooth_f(x, N):
    # U f under rho: integrating against the invariant density preserves mass
    f = GridFunction.from_function(N, lambda u: np.exp(-((u - x) ** 2) * 4))
    assert rho_integral(pf_apply_grid(f)) == pytest.approx(rho_integral(f), abs=1e-8)
