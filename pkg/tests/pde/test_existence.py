"""Tests for the well-posedness checks of the line PDEs."""

import math

import pytest

from src.model.coefficients import TimeCoefficient
from src.model.market import IntensityModel
from src.pde.existence import check_existence_preconditions
from src.presets import fig1


def test_constant_lines_pass(constant_config):
    report = check_existence_preconditions(constant_config)
    assert report.passed, report.to_text()
    assert report.metrics["line1.lambda_lipschitz_y"] == 0.0


def test_bounded_intensity_passes(logistic_config):
    report = check_existence_preconditions(logistic_config)
    assert report.check("line1.lambda_bounded").passed
    assert report.check("line2.q_u0_bounded").passed


def test_exponential_intensity_is_unbounded():
    report = check_existence_preconditions(fig1())
    check = report.check("line2.lambda_bounded")
    assert not check.passed
    assert "logistic" in check.detail
    assert report.check("line1.lambda_bounded").passed


def test_jump_in_base_level(make_config, make_line):
    base = TimeCoefficient.piecewise([0.5], [2.0, 3.0])
    cfg = make_config(line1=make_line(intensity=IntensityModel("constant", base=base)))
    report = check_existence_preconditions(cfg)
    check = report.check("line1.lambda_lipschitz_t")
    assert not check.passed
    assert math.isinf(check.value)
    assert report.check("line2.lambda_lipschitz_t").passed


def test_degenerate_factor(make_config, make_line):
    report = check_existence_preconditions(make_config(line2=make_line(vol=0.0)))
    assert not report.check("line2.factor_vol_elliptic").passed
    assert report.check("line1.factor_vol_elliptic").passed
    assert report.check("sigma_elliptic").passed


def test_tabulated_base_level_slope(make_config, make_line):
    base = TimeCoefficient.tabulated([0.0, 1.0], [2.0, 3.0])
    cfg = make_config(line1=make_line(intensity=IntensityModel("constant", base=base)))
    report = check_existence_preconditions(cfg)
    assert report.metrics["line1.lambda_lipschitz_t"] == pytest.approx(1.0)
    assert report.check("line1.lambda_lipschitz_t").passed
