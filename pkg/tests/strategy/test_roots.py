"""Tests for the bracketing and root-finding helpers."""

import math

import pytest

from src.errors import BracketError, ConvergenceError, DivergentMomentError
from src.strategy.roots import bisect_increasing, bracket_increasing, safeguarded_newton


def cubic(x: float) -> float:
    return x**3 - 2.0


def cubic_slope(x: float) -> float:
    return 3.0 * x * x


class TestBracketIncreasing:
    def test_expands_upwards(self):
        lo, hi = bracket_increasing(lambda x: x - 5.0, 0.0, 1.0)
        assert lo <= 5.0 <= hi

    def test_expands_downwards(self):
        lo, hi = bracket_increasing(lambda x: x + 40.0, 0.0, 1.0)
        assert lo <= -40.0 <= hi

    def test_no_sign_change(self):
        with pytest.raises(BracketError, match="doublings"):
            bracket_increasing(lambda x: -1.0, 0.0, 1.0, max_doublings=10)

    def test_divergence_counts_as_positive(self):
        def f(x: float) -> float:
            if x > 2.0:
                raise DivergentMomentError("test", x, 0, "tilt >= rate")
            return x - 1.5

        lo, hi = bracket_increasing(f, 3.0, 4.0)
        assert lo <= 1.5 <= hi


class TestSafeguardedNewton:
    def test_cubic_root(self):
        result = safeguarded_newton(cubic, cubic_slope, 0.0, 2.0)
        assert result.root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-10)
        assert result.residual <= 1e-10

    def test_root_at_end_point(self):
        result = safeguarded_newton(lambda x: x, lambda x: 1.0, 0.0, 1.0)
        assert result.root == 0.0
        assert result.iterations == 0

    def test_bad_slope_falls_back_to_bisection(self):
        result = safeguarded_newton(cubic, lambda x: -1.0, 0.0, 2.0)
        assert result.root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-9)

    def test_not_a_bracket(self):
        with pytest.raises(BracketError):
            safeguarded_newton(cubic, cubic_slope, 2.0, 3.0)

    def test_iteration_limit(self):
        with pytest.raises(ConvergenceError):
            safeguarded_newton(lambda x: math.exp(x) - 1.5, math.exp, 0.0, 1.0, max_iter=1)


class TestBisection:
    def test_agrees_with_newton(self):
        newton = safeguarded_newton(cubic, cubic_slope, 0.0, 2.0).root
        assert bisect_increasing(cubic, 0.0, 2.0) == pytest.approx(newton, abs=1e-10)

    def test_requires_bracket(self):
        with pytest.raises(BracketError):
            bisect_increasing(cubic, 3.0, 4.0)
