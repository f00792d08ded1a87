import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renyi_gkl.grid import GridFunction, cardinal_matrix, chebyshev_nodes


def test_nodes_shape_and_order():
    x = chebyshev_nodes(64)
    assert x.size == 65
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


def test_nodes_bad_degree():
    with pytest.raises(ValueError):
        chebyshev_nodes(0)


def test_node_evaluation_is_exact():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=33)
    g = GridFunction(2, vals)
    np.testing.assert_array_equal(g(g.nodes), vals)


def test_cardinal_rows_sum_to_one():
    L = cardinal_matrix(20, np.linspace(0, 1, 77))
    np.testing.assert_allclose(L.sum(axis=1), 1.0, atol=1e-13)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8))
def test_polynomials_reproduced(coeffs):
    p = np.polynomial.Polynomial(coeffs)
    g = GridFunction.from_function(3, p, degree=16)
    xs = np.linspace(0, 1, 53)
    assert np.max(np.abs(g(xs) - p(xs))) < 1e-12 * (1 + np.sum(np.abs(coeffs)))


def test_analytic_function_spectral_accuracy():
    g = GridFunction.from_function(2, lambda x: 1.0 / (x + 1.0), degree=64)
    xs = np.linspace(0, 1, 1001)
    assert np.max(np.abs(g(xs) - 1.0 / (xs + 1.0))) < 1e-14


def test_integral_against_closed_form():
    g = GridFunction.from_function(2, lambda x: 1.0 / (x + 1.0))
    assert g.integral() == pytest.approx(math.log(2.0), abs=1e-15)
    b = np.array([0.25, 0.5, 1.0])
    np.testing.assert_allclose(g.integral(0.0, b), np.log1p(b), atol=1e-15)
    assert g.integral(0.5, 1.0) == pytest.approx(math.log(2.0 / 1.5), abs=1e-15)


def test_chebyshev_matches_interpolant():
    g = GridFunction.from_function(2, np.exp, degree=24)
    xs = np.linspace(0, 1, 41)
    np.testing.assert_allclose(g.chebyshev()(xs), g(xs), atol=1e-14)


def test_derivative():
    g = GridFunction.from_function(2, np.sin).derivative()
    xs = np.linspace(0, 1, 101)
    assert np.max(np.abs(g(xs) - np.cos(xs))) < 1e-11


def test_immutable():
    g = GridFunction.constant(2, 1.0, degree=8)
    with pytest.raises(AttributeError):
        g.values = np.zeros(9)
    with pytest.raises(ValueError):
        g.values[0] = 3.0


def test_scalar_call_returns_float():
    g = GridFunction.constant(2, 2.5, degree=8)
    assert isinstance(g(0.3), float) and g(0.3) == pytest.approx(2.5, abs=1e-15)
