"""Backward reaction-diffusion PDEs for the line factors.

For line i, psi_i solves

    psi_t + b(t) psi_y + a(t)^2 / 2 psi_yy + g(t, y) psi = 0,  psi(T, y) = 1,

where g is the minimized pointwise objective (Psi_1 or Psi_2). g does not
depend on psi, so each time step is a linear tridiagonal solve. Crank-Nicolson
is used after a Rannacher start-up of two implicit Euler half steps; the
boundary rows carry the zero-curvature condition psi_yy = 0.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import structlog
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from src.errors import OutOfRangeError, PositivityError, PreconditionError
from src.log_utils import log_function_call
from src.model.coefficients import TimeCoefficient
from src.model.market import ModelConfig
from src.pde.grid import Grid1D
from src.strategy.psi import psi1, psi2
from src.strategy.solvers import solve_second_line, solve_u1_star

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DEFAULT_A_MIN = 1e-8


def min_generator_term(cfg: ModelConfig, line: int, t: float, y: float) -> float:
    """inf over controls of Psi_1 (line 1) or Psi_2 (line 2) at (t, y)."""
    if line == 1:
        u1 = solve_u1_star(cfg, t, y).u1_star
        return float(psi1(cfg, t, y, u1))
    if line == 2:
        sol = solve_second_line(cfg, t, y)
        return float(psi2(cfg, t, y, sol.u2_star, sol.w_star))
    raise ValueError(f"Line index must be 1 or 2, got {line}")


@dataclass(frozen=True, eq=False)
class ReactionTable:
    """g on every grid node plus the row at T - dt/2 used by the start-up steps."""

    values: np.ndarray
    half_step_row: np.ndarray

    @classmethod
    def from_function(
        cls, grid: Grid1D, func: Callable[[float, np.ndarray], np.ndarray]
    ) -> "ReactionTable":
        rows = [np.broadcast_to(func(float(t), grid.space), grid.space.shape) for t in grid.times]
        half = np.broadcast_to(func(float(grid.times[-1] - 0.5 * grid.dt), grid.space), grid.space.shape)
        return cls(np.vstack(rows).astype(float), np.array(half, dtype=float))


def reaction_row(cfg: ModelConfig, line: int, t: float, space: np.ndarray) -> np.ndarray:
    """g(t, .) on the factor nodes; one solve when the line ignores the factor."""
    # g does not vary in y when lam and the premia ignore the factor
    if cfg.line(line).is_y_independent:
        return np.full(space.shape, min_generator_term(cfg, line, t, float(space[0])))
    return np.array([min_generator_term(cfg, line, t, float(y)) for y in space])


@log_function_call
def build_reaction_table(cfg: ModelConfig, line: int, grid: Grid1D) -> ReactionTable:
    return ReactionTable.from_function(grid, lambda t, ys: reaction_row(cfg, line, t, ys))


def _operator_bands(h: float, drift: float, vol: float, g: np.ndarray):
    """Bands of (A psi)_k = lo psi_{k-1} + diag_k psi_k + up psi_{k+1}, interior k."""
    a2 = vol * vol
    lo = a2 / (2.0 * h * h) - drift / (2.0 * h)
    up = a2 / (2.0 * h * h) + drift / (2.0 * h)
    diag = -a2 / (h * h) + g[1:-1]
    return lo, diag, up


def _apply(psi: np.ndarray, lo: float, diag: np.ndarray, up: float) -> np.ndarray:
    return lo * psi[:-2] + diag * psi[1:-1] + up * psi[2:]


def _theta_step(
    psi: np.ndarray,
    step: float,
    theta: float,
    h: float,
    old: tuple,
    new: tuple,
) -> np.ndarray:
    """One theta-scheme step; ``old``/``new`` are (drift, vol, g-row)."""
    # Explicit part at the old time level
    lo_o, diag_o, up_o = _operator_bands(h, *old)
    rhs = psi[1:-1] + (1.0 - theta) * step * _apply(psi, lo_o, diag_o, up_o)

    # Implicit part at the new time level
    lo, diag, up = _operator_bands(h, *new)
    n_int = diag.size
    main = 1.0 - theta * step * diag
    lower = np.full(n_int, -theta * step * lo)
    upper = np.full(n_int, -theta * step * up)
    # psi_0 = 2 psi_1 - psi_2 and psi_N = 2 psi_{N-1} - psi_{N-2}
    main[0] += 2.0 * lower[0]
    upper[0] -= lower[0]
    main[-1] += 2.0 * upper[-1]
    lower[-1] -= upper[-1]

    # solve_banded layout: upper, main, lower diagonals
    bands = np.zeros((3, n_int))
    bands[0, 1:] = upper[:-1]
    bands[1, :] = main
    bands[2, :-1] = lower[1:]
    interior = solve_banded((1, 1), bands, rhs)

    out = np.empty_like(psi)
    out[1:-1] = interior
    # Zero-curvature boundaries
    out[0] = 2.0 * interior[0] - interior[1]
    out[-1] = 2.0 * interior[-1] - interior[-2]
    return out


def solve_linear_backward(
    grid: Grid1D, drift: TimeCoefficient, vol: TimeCoefficient, table: ReactionTable
) -> np.ndarray:
    """March psi back from psi(T) = 1; returns values indexed [time, space]."""
    if grid.n < 3:
        raise PreconditionError(f"Backward solve needs at least 3 space steps, got {grid.n}")
    times, h, dt = grid.times, grid.dy, grid.dt
    values = np.empty((grid.m + 1, grid.n + 1))
    values[-1] = 1.0

    def coeffs(t: float, g: np.ndarray) -> tuple:
        return float(drift(t)), float(vol(t)), g

    # Rannacher start-up: two implicit Euler half steps over the last interval.
    t_half = float(times[-1] - 0.5 * dt)
    psi = _theta_step(values[-1], 0.5 * dt, 1.0, h, coeffs(times[-1], table.values[-1]),
                      coeffs(t_half, table.half_step_row))
    psi = _theta_step(psi, 0.5 * dt, 1.0, h, coeffs(t_half, table.half_step_row),
                      coeffs(times[-2], table.values[-2]))
    values[-2] = psi
    # Crank-Nicolson for the remaining intervals
    for j in range(grid.m - 2, -1, -1):
        psi = _theta_step(
            psi, dt, 0.5, h, coeffs(times[j + 1], table.values[j + 1]), coeffs(times[j], table.values[j])
        )
        values[j] = psi
    return values


@dataclass(frozen=True, eq=False)
class PdeSolution:
    """psi_line on a grid, psi(T, .) = 1, interpolated bilinearly."""

    line: int
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "_interp",
            RegularGridInterpolator((self.grid.times, self.grid.space), self.values, method="linear"),
        )

    def __call__(self, t, y):
        tt, yy = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(y, dtype=float))
        times, space = self.grid.times, self.grid.space
        if (
            np.any(tt < times[0]) or np.any(tt > times[-1])
            or np.any(yy < space[0]) or np.any(yy > space[-1])
        ):
            logger.error(f"PDE query ({t}, {y}) outside the grid of line {self.line}")
            raise OutOfRangeError(
                f"Query outside [{times[0]}, {times[-1]}] x [{space[0]}, {space[-1]}]"
            )
        # the interpolator returns at least 1-d; restore the query shape
        out = self._interp(np.stack((tt, yy), axis=-1)).reshape(tt.shape)
        return float(out) if np.ndim(out) == 0 else out

    def csv_rows(self) -> List[List[float]]:
        return [
            [float(t), float(y), float(self.values[i, j])]
            for i, t in enumerate(self.grid.times)
            for j, y in enumerate(self.grid.space)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "line": self.line,
            "grid": self.grid.to_dict(),
            "times": self.grid.times.tolist(),
            "space": self.grid.space.tolist(),
            "psi": self.values.tolist(),
        }


def _check_ellipticity(cfg: ModelConfig, line: int, grid: Grid1D, a_min: float) -> None:
    vol = cfg.line(line).vol
    samples = np.concatenate((grid.times, vol.nodes(0.0, cfg.horizon)))
    smallest = float(np.min(np.abs(np.asarray(vol(samples)))))
    if smallest < a_min:
        logger.error(f"Factor volatility of line {line} drops to {smallest} < a_min={a_min}")
        raise PreconditionError(
            f"Line {line} factor volatility must satisfy a(t) >= {a_min} > 0, min is {smallest}"
        )


@log_function_call
def solve_psi_pde(
    cfg: ModelConfig,
    line: int,
    grid: Grid1D,
    a_min: float = DEFAULT_A_MIN,
    table: Optional[ReactionTable] = None,
) -> PdeSolution:
    """Solve the backward PDE of one line.

    Raises:
        PreconditionError: If a(t) < a_min somewhere or the grid is too small.
        PositivityError: If the discrete solution is not strictly positive.
    """
    if abs(grid.times[-1] - cfg.horizon) > 1e-12 or grid.times[0] != 0.0:
        logger.error(f"Grid covers [{grid.times[0]}, {grid.times[-1]}], horizon is {cfg.horizon}")
        raise PreconditionError(f"Grid must span [0, {cfg.horizon}] in time")
    _check_ellipticity(cfg, line, grid, a_min)
    # g is precomputed on every node, so each step is one tridiagonal solve
    table = table or build_reaction_table(cfg, line, grid)
    ins = cfg.line(line)
    values = solve_linear_backward(grid, ins.drift, ins.vol, table)
    # psi is an expectation of an exponential, hence positive
    smallest = float(np.min(values))
    if not smallest > 0.0:
        index = np.unravel_index(np.argmin(values), values.shape)
        logger.error(f"psi_{line} lost positivity: {smallest} at node {index}")
        raise PositivityError(
            f"psi_{line} = {smallest:.3g} at t={grid.times[index[0]]:.6g}, "
            f"y={grid.space[index[1]]:.6g}; refine the grid or widen the domain"
        )
    structured_logger.info(
        "PDE solved",
        line=line,
        m=grid.m,
        n=grid.n,
        psi_min=smallest,
        psi_at_y0=float(np.interp(ins.y0, grid.space, values[0])),
    )
    return PdeSolution(line, grid, values)
