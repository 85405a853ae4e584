"""Backward PDEs for the line factors and the assembled value function."""

from src.pde.existence import check_existence_preconditions
from src.pde.feynman_kac import FeynmanKacEstimate, feynman_kac_oracle
from src.pde.grid import Grid1D, default_grid
from src.pde.solver import (
    PdeSolution,
    ReactionTable,
    min_generator_term,
    solve_psi_pde,
)
from src.pde.value import ValueFunction, value_function

__all__ = [
    "FeynmanKacEstimate",
    "Grid1D",
    "PdeSolution",
    "ReactionTable",
    "ValueFunction",
    "check_existence_preconditions",
    "default_grid",
    "feynman_kac_oracle",
    "min_generator_term",
    "solve_psi_pde",
    "value_function",
]
