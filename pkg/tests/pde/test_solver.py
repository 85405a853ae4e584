"""Tests for the backward PDE solver."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.errors import OutOfRangeError, PositivityError, PreconditionError
from src.pde.grid import Grid1D, default_grid
from src.pde.solver import (
    ReactionTable,
    min_generator_term,
    solve_linear_backward,
    solve_psi_pde,
)


@pytest.fixture
def small_grid():
    return Grid1D.uniform(1.0, -1.0, 1.0, 200, 20)


class TestLinearBackward:
    def test_zero_reaction_keeps_terminal_value(self, constant_config, small_grid):
        line = constant_config.line1
        table = ReactionTable.from_function(small_grid, lambda t, ys: 0.0 * ys)
        values = solve_linear_backward(small_grid, line.drift, line.vol, table)
        assert np.max(np.abs(values - 1.0)) < 1e-12

    def test_constant_reaction_is_exponential(self, constant_config, small_grid):
        line = constant_config.line1
        table = ReactionTable.from_function(small_grid, lambda t, ys: -0.3 + 0.0 * ys)
        values = solve_linear_backward(small_grid, line.drift, line.vol, table)
        expected = np.exp(-0.3 * (1.0 - small_grid.times))
        assert values[:, 10] == pytest.approx(expected, rel=1e-4)

    def test_larger_reaction_gives_larger_solution(self, constant_config):
        line = constant_config.line1
        grid = Grid1D.uniform(1.0, -2.0, 2.0, 100, 40)
        low = ReactionTable.from_function(grid, lambda t, ys: -0.5 * ys**2)
        high = ReactionTable.from_function(grid, lambda t, ys: -0.5 * ys**2 + 0.2)
        values_low = solve_linear_backward(grid, line.drift, line.vol, low)
        values_high = solve_linear_backward(grid, line.drift, line.vol, high)
        assert np.all(values_high >= values_low)

    def test_needs_three_space_steps(self, constant_config):
        line = constant_config.line1
        grid = Grid1D.uniform(1.0, -1.0, 1.0, 10, 2)
        table = ReactionTable.from_function(grid, lambda t, ys: 0.0 * ys)
        with pytest.raises(PreconditionError, match="3 space steps"):
            solve_linear_backward(grid, line.drift, line.vol, table)


class TestSolvePsiPde:
    @pytest.mark.parametrize("line", [1, 2])
    def test_factor_free_line_matches_quadrature(self, constant_config, line):
        cfg = constant_config
        solution = solve_psi_pde(cfg, line, default_grid(cfg, line, m=100, n=20))
        exponent, _ = quad(lambda s: min_generator_term(cfg, line, s, 0.0), 0.0, cfg.horizon)
        assert solution(0.0, 0.0) == pytest.approx(math.exp(exponent), rel=1e-4)
        assert solution(1.0, 0.3) == pytest.approx(1.0)

    def test_loss_of_positivity(self, constant_config):
        grid = Grid1D.uniform(1.0, -1.0, 1.0, 10, 10)
        table = ReactionTable.from_function(grid, lambda t, ys: -1000.0 + 0.0 * ys)
        with pytest.raises(PositivityError, match="refine the grid"):
            solve_psi_pde(constant_config, 1, grid, table=table)

    def test_degenerate_factor_rejected(self, make_config, make_line):
        cfg = make_config(line1=make_line(vol=0.0))
        with pytest.raises(PreconditionError, match="volatility"):
            solve_psi_pde(cfg, 1, Grid1D.uniform(1.0, -1.0, 1.0, 10, 10))

    def test_grid_must_span_horizon(self, constant_config):
        with pytest.raises(PreconditionError, match="span"):
            solve_psi_pde(constant_config, 1, Grid1D.uniform(0.5, -1.0, 1.0, 10, 10))

    def test_queries_and_export(self, constant_config):
        grid = Grid1D.uniform(1.0, -1.0, 1.0, 10, 10)
        solution = solve_psi_pde(constant_config, 1, grid)
        assert solution(np.array([0.0, 0.5]), 0.0).shape == (2,)
        with pytest.raises(OutOfRangeError):
            solution(0.0, 3.0)
        assert len(solution.csv_rows()) == 11 * 11
        assert len(solution.to_dict()["psi"]) == 11

    def test_scalar_query_is_float(self, constant_config):
        grid = Grid1D.uniform(1.0, -1.0, 1.0, 10, 10)
        solution = solve_psi_pde(constant_config, 2, grid)
        value = solution(0.0, 0.0)
        assert isinstance(value, float)
        assert solution(np.zeros((2, 3)), 0.0).shape == (2, 3)

    def test_line_index(self, constant_config):
        with pytest.raises(ValueError, match="1 or 2"):
            min_generator_term(constant_config, 3, 0.0, 0.0)


@pytest.mark.slow
def test_second_order_refinement(logistic_config):
    cfg = logistic_config
    values = [
        solve_psi_pde(cfg, 1, default_grid(cfg, 1, m=m, n=n))(0.0, 0.0)
        for m, n in ((20, 40), (40, 80), (80, 160))
    ]
    ratio = (values[0] - values[1]) / (values[1] - values[2])
    assert 3.5 <= ratio <= 4.5
