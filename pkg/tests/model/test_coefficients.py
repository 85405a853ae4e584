"""Tests for time-dependent coefficients."""

import math

import numpy as np
import pytest

from src.errors import ModelError
from src.model.coefficients import TimeCoefficient


class TestEvaluation:
    def test_constant(self):
        f = TimeCoefficient.constant(0.3)
        assert f(0.7) == 0.3
        assert np.allclose(f(np.array([0.0, 0.5, 1.0])), 0.3)
        assert f.integral(0.2, 0.7) == pytest.approx(0.15)

    def test_piecewise_is_right_continuous(self):
        f = TimeCoefficient.piecewise([0.5], [1.0, 3.0])
        assert f(0.25) == 1.0
        assert f(0.5) == 3.0
        assert f(0.75) == 3.0

    def test_piecewise_integrals(self):
        f = TimeCoefficient.piecewise([0.5], [1.0, 3.0])
        assert f.antiderivative(0.25) == pytest.approx(0.25)
        assert f.antiderivative(0.75) == pytest.approx(1.25)
        assert f.integral(0.0, 1.0) == pytest.approx(2.0)
        assert f.squared_integral(0.0, 1.0) == pytest.approx(0.5 + 4.5)

    def test_tabulated_linear_interpolation(self):
        f = TimeCoefficient.tabulated([0.0, 1.0], [1.0, 3.0])
        assert f(0.5) == pytest.approx(2.0)
        assert f.antiderivative(0.5) == pytest.approx(0.75)
        assert f.integral(0.0, 1.0) == pytest.approx(2.0)
        # int_0^1 (1 + 2t)^2 dt
        assert f.squared_integral(0.0, 1.0) == pytest.approx(13.0 / 3.0)

    def test_array_integral(self):
        f = TimeCoefficient.tabulated([0.0, 1.0], [1.0, 3.0])
        lo = np.array([0.0, 0.5])
        hi = np.array([0.5, 1.0])
        assert np.allclose(f.integral(lo, hi), [0.75, 1.25])


class TestShape:
    def test_extrema(self):
        assert TimeCoefficient.piecewise([0.5], [1.0, 3.0]).extrema(0.0, 1.0) == (1.0, 3.0)
        assert TimeCoefficient.tabulated([0.0, 1.0], [2.0, -1.0]).extrema(0.0, 1.0) == (-1.0, 2.0)

    def test_lipschitz(self):
        assert TimeCoefficient.constant(4.0).lipschitz(0.0, 1.0) == 0.0
        assert TimeCoefficient.tabulated([0.0, 1.0], [1.0, 3.0]).lipschitz(0.0, 1.0) == pytest.approx(2.0)
        jump = TimeCoefficient.piecewise([0.5], [1.0, 3.0])
        assert math.isinf(jump.lipschitz(0.0, 1.0))
        assert jump.lipschitz(0.0, 0.4) == 0.0

    def test_absolute_integral_splits_at_zero_crossing(self):
        f = TimeCoefficient.tabulated([0.0, 1.0], [-1.0, 1.0])
        assert f.integral(0.0, 1.0) == pytest.approx(0.0)
        assert f.abs_integral(0.0, 1.0) == pytest.approx(0.5)

    def test_covers(self):
        assert TimeCoefficient.constant(1.0).covers(10.0)
        f = TimeCoefficient.tabulated([0.0, 0.5], [1.0, 2.0])
        assert f.covers(0.5)
        assert not f.covers(1.0)

    def test_nodes_inside_interval(self):
        f = TimeCoefficient.piecewise([0.25, 0.5, 0.75], [1.0, 2.0, 3.0, 4.0])
        assert f.nodes(0.3, 1.0).tolist() == [0.5, 0.75]


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ModelError):
            TimeCoefficient("spline", (1.0,))

    def test_piecewise_length_mismatch(self):
        with pytest.raises(ModelError, match="len"):
            TimeCoefficient.piecewise([0.5], [1.0])

    def test_breakpoints_must_increase(self):
        with pytest.raises(ModelError):
            TimeCoefficient.piecewise([0.5, 0.4], [1.0, 2.0, 3.0])

    def test_non_finite_values(self):
        with pytest.raises(ModelError):
            TimeCoefficient.constant(math.nan)

    def test_tabulated_needs_two_nodes(self):
        with pytest.raises(ModelError):
            TimeCoefficient.tabulated([0.0], [1.0])


class TestJson:
    def test_number_is_constant(self):
        f = TimeCoefficient.from_json_value(2.5)
        assert f.kind == "constant"
        assert f.to_json_value() == 2.5

    def test_piecewise_object(self):
        data = {"kind": "piecewise", "breakpoints": [0.5], "values": [1.0, 2.0]}
        f = TimeCoefficient.from_json_value(data)
        assert f(0.75) == 2.0
        assert f.to_json_value() == data

    def test_boolean_rejected(self):
        with pytest.raises(ModelError, match="boolean"):
            TimeCoefficient.from_json_value(True, "market.r")

    def test_missing_key_reports_path(self):
        with pytest.raises(ModelError, match="market.mu: missing key"):
            TimeCoefficient.from_json_value({"kind": "tabulated", "values": [1.0]}, "market.mu")
