"""Contracts of the scalar solvers."""

import math

import pytest

from prefsim.errors import NumericError
from prefsim.solvers import (
    bisect_rising_sign,
    bisect_root,
    gradient_descent_scalar,
    minimize_scalar_convex,
)


class TestBisectRoot:
    def test_linear(self):
        root, converged = bisect_root(lambda x: x - 2.0, 0.0, 10.0, tol=1e-12)
        assert converged and root == pytest.approx(2.0, abs=1e-11)

    def test_requires_sign_change(self):
        with pytest.raises(NumericError):
            bisect_root(lambda x: x + 5.0, 0.0, 10.0, tol=1e-8)

    def test_nan_rejected(self):
        with pytest.raises(NumericError):
            bisect_root(lambda x: math.nan, -1.0, 1.0, tol=1e-8)


class TestMinimizeScalarConvex:
    def test_quadratic(self):
        result = minimize_scalar_convex(lambda x: (x - 2.0) ** 2, 0.0, 10.0, tol=1e-10)
        assert result.minimizer_exists and result.converged
        assert result.argmin == pytest.approx(2.0, abs=1e-8)

    def test_minimum_outside_initial_bracket(self):
        result = minimize_scalar_convex(lambda x: (x - 50.0) ** 2, 0.0, 1.0, tol=1e-9)
        assert result.minimizer_exists
        assert result.argmin == pytest.approx(50.0, abs=1e-6)

    def test_decreasing_function_reports_nonexistence(self):
        result = minimize_scalar_convex(
            lambda x: math.exp(-x), 0.0, 10.0, tol=1e-9, expand_limit=1e6
        )
        assert not result.minimizer_exists

    def test_flat_minimum(self):
        result = minimize_scalar_convex(
            lambda x: abs(x - 1.0) + abs(x - 3.0), -5.0, 8.0, tol=1e-9
        )
        assert result.minimizer_exists
        assert 1.0 - 1e-6 <= result.argmin <= 3.0 + 1e-6
        assert result.value == pytest.approx(2.0, abs=1e-9)


class TestBisectRisingSign:
    def test_step_function_left_edge(self):
        # Right derivative jumps from -1 to +2 at x = 1.5.
        deriv = lambda x: -1.0 if x < 1.5 else 2.0
        point, converged = bisect_rising_sign(deriv, 0.0, 4.0, tol=1e-10)
        assert converged and point == pytest.approx(1.5, abs=1e-9)

    def test_invariant_checked(self):
        with pytest.raises(NumericError):
            bisect_rising_sign(lambda x: 1.0, 0.0, 1.0, tol=1e-8)


class TestGradientDescent:
    def test_quadratic(self):
        x, value, converged = gradient_descent_scalar(
            lambda x: (x - 3.0) ** 2, lambda x: 2 * (x - 3.0), x0=-10.0
        )
        assert converged
        assert x == pytest.approx(3.0, abs=1e-6)

    def test_kinked_objective(self):
        fn = lambda x: abs(x - 2.0) + 0.5 * (x - 2.0) ** 2
        grad = lambda x: (1.0 if x >= 2.0 else -1.0) + (x - 2.0)
        x, _, _ = gradient_descent_scalar(fn, grad, x0=7.0)
        assert x == pytest.approx(2.0, abs=1e-6)
