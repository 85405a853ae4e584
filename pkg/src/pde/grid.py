"""Uniform time-factor grids for the backward PDEs."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import ModelError
from src.model.market import ModelConfig

DEFAULT_TIME_STEPS = 200
DEFAULT_SPACE_STEPS = 400
# Half-width of the truncated factor domain in factor standard deviations
DOMAIN_STD_WIDTH = 6.0


@dataclass(frozen=True, eq=False)
class Grid1D:
    times: np.ndarray
    space: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) < 3 or len(self.space) < 3:
            raise ModelError(
                f"Grid needs M >= 2 and N >= 2 steps, got M={len(self.times) - 1}, "
                f"N={len(self.space) - 1}"
            )
        if np.any(np.diff(self.times) <= 0.0) or np.any(np.diff(self.space) <= 0.0):
            raise ModelError("Grid nodes must be strictly increasing")

    @classmethod
    def uniform(
        cls, horizon: float, y_min: float, y_max: float, m: int, n: int
    ) -> "Grid1D":
        return cls(np.linspace(0.0, horizon, m + 1), np.linspace(y_min, y_max, n + 1))

    @property
    def m(self) -> int:
        return len(self.times) - 1

    @property
    def n(self) -> int:
        return len(self.space) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def dy(self) -> float:
        return float(self.space[1] - self.space[0])

    def to_dict(self) -> dict:
        return {
            "t_min": float(self.times[0]),
            "t_max": float(self.times[-1]),
            "y_min": float(self.space[0]),
            "y_max": float(self.space[-1]),
            "m": self.m,
            "n": self.n,
        }


def default_grid(
    cfg: ModelConfig,
    line: int,
    m: int = DEFAULT_TIME_STEPS,
    n: int = DEFAULT_SPACE_STEPS,
    half_width: Optional[float] = None,
) -> Grid1D:
    """Grid on [0, T] x [y0 - h, y0 + h], h = max(6 a_max sqrt(T), half_width)."""
    ins = cfg.line(line)
    a_max = max(abs(v) for v in ins.vol.extrema(0.0, cfg.horizon))
    width = max(DOMAIN_STD_WIDTH * a_max * math.sqrt(cfg.horizon), half_width or 0.0)
    if width <= 0.0:
        width = 1.0
    return Grid1D.uniform(cfg.horizon, ins.y0 - width, ins.y0 + width, m, n)
