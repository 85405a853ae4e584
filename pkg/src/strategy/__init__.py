"""Pointwise optimal reinsurance and investment."""

from src.strategy.comparison import (
    ComparisonReport,
    SweepResult,
    compare_shock_effect,
    sweep_parameter,
)
from src.strategy.field import StrategyField, tabulate_strategy
from src.strategy.psi import H, H_tilde, psi1, psi2
from src.strategy.solvers import (
    Region,
    SignRegion,
    evp_closed_form,
    no_shock_strategy,
    solve_second_line,
    solve_u1_star,
    solve_w_tilde,
    w_star_bounds,
)

__all__ = [
    "ComparisonReport",
    "H",
    "H_tilde",
    "Region",
    "SignRegion",
    "StrategyField",
    "SweepResult",
    "compare_shock_effect",
    "evp_closed_form",
    "no_shock_strategy",
    "psi1",
    "psi2",
    "solve_second_line",
    "solve_u1_star",
    "solve_w_tilde",
    "sweep_parameter",
    "tabulate_strategy",
    "w_star_bounds",
]
