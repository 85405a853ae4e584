"""Tabulated optimal strategy on (t, y) grids with bilinear interpolation."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog
from scipy.interpolate import RegularGridInterpolator

from src.log_utils import log_function_call
from src.model.market import ModelConfig
from src.strategy.solvers import (
    Region,
    SignRegion,
    solve_second_line,
    solve_u1_star,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

CSV_COLUMNS = ("t", "y", "u1", "u2", "w", "region", "sign_region")

THREADS_ENV = "SHOCKREINS_THREADS"


def default_workers() -> int:
    """Worker count from SHOCKREINS_THREADS, else the CPU count."""
    value = os.environ.get(THREADS_ENV)
    # Invalid overrides fall back to the CPU count
    if value:
        try:
            workers = int(value)
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={value!r}")
        else:
            if workers >= 1:
                return workers
            logger.warning(f"Ignoring non-positive {THREADS_ENV}={value!r}")
    return os.cpu_count() or 1


def _interpolator(times: np.ndarray, ys: np.ndarray, values: np.ndarray) -> RegularGridInterpolator:
    return RegularGridInterpolator((times, ys), values, method="linear", bounds_error=True)


@dataclass(frozen=True, eq=False)
class StrategyField:
    """Optimal (u1, u2, w) tabulated on grids.

    ``u1`` lives on ``times x y1``; ``u2``, ``w``, ``region`` and
    ``sign_region`` on ``times x y2``. Queries outside the grids are clamped
    to the nearest grid point before bilinear interpolation.
    """

    times: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    u1_values: np.ndarray
    u2_values: np.ndarray
    w_values: np.ndarray
    region: np.ndarray
    sign_region: np.ndarray

    def __post_init__(self) -> None:
        if self.u1_values.shape != (len(self.times), len(self.y1)):
            raise ValueError("u1 table does not match the time x y1 grid")
        for name in ("u2_values", "w_values", "region", "sign_region"):
            if getattr(self, name).shape != (len(self.times), len(self.y2)):
                raise ValueError(f"{name} table does not match the time x y2 grid")
        # Interpolators are built once; the dataclass is frozen
        object.__setattr__(self, "_u1", _interpolator(self.times, self.y1, self.u1_values))
        object.__setattr__(self, "_u2", _interpolator(self.times, self.y2, self.u2_values))
        object.__setattr__(self, "_w", _interpolator(self.times, self.y2, self.w_values))

    @staticmethod
    def _points(times: np.ndarray, ys: np.ndarray, t, y) -> np.ndarray:
        tt, yy = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(y, dtype=float))
        # Clamp to the tabulated rectangle
        tt = np.clip(tt, times[0], times[-1])
        yy = np.clip(yy, ys[0], ys[-1])
        return np.stack((tt, yy), axis=-1)

    def _evaluate(self, table: RegularGridInterpolator, ys: np.ndarray, t, y):
        points = self._points(self.times, ys, t, y)
        out = table(points).reshape(points.shape[:-1])
        return float(out) if np.ndim(out) == 0 else out

    def u1(self, t, y1):
        return self._evaluate(self._u1, self.y1, t, y1)

    def u2(self, t, y2):
        return self._evaluate(self._u2, self.y2, t, y2)

    def w(self, t, y2):
        return self._evaluate(self._w, self.y2, t, y2)

    def csv_rows(self) -> List[List[Any]]:
        """One row per (t, y2) node; u1 is interpolated at y = y2."""
        rows = []
        for i, t in enumerate(self.times):
            u1_row = self.u1(np.full(len(self.y2), t), self.y2)
            for j, y in enumerate(self.y2):
                rows.append(
                    [
                        float(t),
                        float(y),
                        float(u1_row[j]),
                        float(self.u2_values[i, j]),
                        float(self.w_values[i, j]),
                        str(self.region[i, j]),
                        str(self.sign_region[i, j]),
                    ]
                )
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "times": self.times.tolist(),
            "y1": self.y1.tolist(),
            "y2": self.y2.tolist(),
            "u1": self.u1_values.tolist(),
            "u2": self.u2_values.tolist(),
            "w": self.w_values.tolist(),
            "region": self.region.tolist(),
            "sign_region": self.sign_region.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StrategyField":
        return cls(
            times=np.asarray(data["times"], dtype=float),
            y1=np.asarray(data["y1"], dtype=float),
            y2=np.asarray(data["y2"], dtype=float),
            u1_values=np.asarray(data["u1"], dtype=float),
            u2_values=np.asarray(data["u2"], dtype=float),
            w_values=np.asarray(data["w"], dtype=float),
            region=np.asarray(data["region"], dtype=object),
            sign_region=np.asarray(data["sign_region"], dtype=object),
        )


def _first_line_row(cfg: ModelConfig, t: float, y1: np.ndarray) -> np.ndarray:
    return np.array([solve_u1_star(cfg, t, y).u1_star for y in y1])


def _second_line_row(cfg: ModelConfig, t: float, y2: np.ndarray):
    solutions = [solve_second_line(cfg, t, y) for y in y2]
    return (
        np.array([s.u2_star for s in solutions]),
        np.array([s.w_star for s in solutions]),
        np.array([s.region.value for s in solutions], dtype=object),
        np.array([s.sign_region.value for s in solutions], dtype=object),
    )


@log_function_call
def tabulate_strategy(
    cfg: ModelConfig,
    times: Sequence[float],
    y1: Sequence[float],
    y2: Sequence[float],
    workers: Optional[int] = None,
) -> StrategyField:
    """Solve the pointwise problems on every grid node.

    Time rows are independent and are distributed over a thread pool.
    """
    times = np.asarray(times, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    workers = workers or default_workers()
    logger.info(
        f"Tabulating strategy on {len(times)} x ({len(y1)}, {len(y2)}) nodes with {workers} worker(s)"
    )
    # One task per time row; pool.map keeps the row order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        first_rows = list(pool.map(lambda t: _first_line_row(cfg, t, y1), times))
        second_rows = list(pool.map(lambda t: _second_line_row(cfg, t, y2), times))
    field = StrategyField(
        times=times,
        y1=y1,
        y2=y2,
        u1_values=np.vstack(first_rows),
        u2_values=np.vstack([row[0] for row in second_rows]),
        w_values=np.vstack([row[1] for row in second_rows]),
        region=np.vstack([row[2] for row in second_rows]),
        sign_region=np.vstack([row[3] for row in second_rows]),
    )
    structured_logger.info(
        "Strategy tabulated",
        nodes=int(times.size * (y1.size + y2.size)),
        interior_share=float(np.mean(field.region == Region.INTERIOR.value)),
        short_share=float(np.mean(field.sign_region == SignRegion.SHORT.value)),
    )
    return field
