"""Deterministic time-dependent model coefficients.

Three kinds are supported: constant, piecewise-constant (right-continuous,
with interior breakpoints) and tabulated with linear interpolation. All
integrals are computed exactly for each kind.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.errors import ModelError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

CONSTANT = "constant"
PIECEWISE = "piecewise"
TABULATED = "tabulated"
KINDS = (CONSTANT, PIECEWISE, TABULATED)


def _output(t: ArrayLike, values: np.ndarray) -> ArrayLike:
    if np.ndim(t) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class TimeCoefficient:
    """A mapping t -> real on the model horizon.

    For ``piecewise`` the value on ``[breakpoints[i-1], breakpoints[i])`` is
    ``values[i]``; ``values`` has one more entry than ``breakpoints``. For
    ``tabulated`` the nodes must cover the horizon; values are linearly
    interpolated and held flat outside the nodes.
    """

    kind: str
    values: Tuple[float, ...]
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ModelError(f"Unknown coefficient kind '{self.kind}'")
        values = np.asarray(self.values, dtype=float)
        breaks = np.asarray(self.breakpoints, dtype=float)
        if values.size == 0 or not np.all(np.isfinite(values)):
            raise ModelError(f"Coefficient values must be finite and non-empty: {self.values}")
        if not np.all(np.isfinite(breaks)):
            raise ModelError("Coefficient breakpoints must be finite")
        if self.kind == CONSTANT and (values.size != 1 or breaks.size != 0):
            raise ModelError("A constant coefficient takes exactly one value")
        if self.kind == PIECEWISE:
            if values.size != breaks.size + 1:
                raise ModelError(
                    f"Piecewise coefficient needs len(values) == len(breakpoints) + 1, "
                    f"got {values.size} and {breaks.size}"
                )
            if breaks.size and (breaks[0] <= 0.0 or np.any(np.diff(breaks) <= 0.0)):
                raise ModelError("Breakpoints must be positive and strictly increasing")
        if self.kind == TABULATED:
            if values.size != breaks.size or values.size < 2:
                raise ModelError("Tabulated coefficient needs >= 2 nodes and one value per node")
            if np.any(np.diff(breaks) <= 0.0):
                raise ModelError("Tabulation nodes must be strictly increasing")

    # Construction helpers

    @classmethod
    def constant(cls, value: float) -> "TimeCoefficient":
        return cls(CONSTANT, (float(value),))

    @classmethod
    def piecewise(
        cls, breakpoints: Sequence[float], values: Sequence[float]
    ) -> "TimeCoefficient":
        return cls(PIECEWISE, tuple(float(v) for v in values), tuple(float(b) for b in breakpoints))

    @classmethod
    def tabulated(cls, nodes: Sequence[float], values: Sequence[float]) -> "TimeCoefficient":
        return cls(TABULATED, tuple(float(v) for v in values), tuple(float(n) for n in nodes))

    # Evaluation

    @property
    def is_constant(self) -> bool:
        return len(set(self.values)) == 1

    def covers(self, horizon: float) -> bool:
        """True when the coefficient is defined on all of [0, horizon]."""
        if self.kind != TABULATED:
            return True
        return self.breakpoints[0] <= 0.0 and self.breakpoints[-1] >= horizon

    def __call__(self, t: ArrayLike) -> ArrayLike:
        tt = np.asarray(t, dtype=float)
        vals = np.asarray(self.values)
        if self.kind == CONSTANT:
            out = np.full(tt.shape, vals[0])
        elif self.kind == PIECEWISE:
            idx = np.searchsorted(np.asarray(self.breakpoints), tt, side="right")
            out = vals[idx]
        else:
            out = np.interp(tt, np.asarray(self.breakpoints), vals)
        return _output(t, out)

    def antiderivative(self, t: ArrayLike) -> ArrayLike:
        """Exact integral of the coefficient from 0 to t."""
        tt = np.asarray(t, dtype=float)
        vals = np.asarray(self.values)
        if self.kind == CONSTANT:
            return _output(t, vals[0] * tt)
        breaks = np.asarray(self.breakpoints)
        if self.kind == PIECEWISE:
            anchors = np.concatenate(([0.0], breaks))
            cumulative = np.concatenate(([0.0], np.cumsum(vals[:-1] * np.diff(anchors))))
            idx = np.searchsorted(breaks, tt, side="right")
            return _output(t, cumulative[idx] + vals[idx] * (tt - anchors[idx]))
        # Tabulated: exact trapezoid on the piecewise-linear interpolant.
        return _output(t, self._tabulated_cumulative(tt) - self._tabulated_cumulative(np.float64(0.0)))

    def _tabulated_cumulative(self, tt: np.ndarray) -> np.ndarray:
        nodes = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        at_nodes = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes))))
        idx = np.clip(np.searchsorted(nodes, tt, side="right") - 1, 0, nodes.size - 1)
        ft = np.interp(tt, nodes, vals)
        # Flat extension below the first node.
        below = tt < nodes[0]
        partial = at_nodes[idx] + 0.5 * (vals[idx] + ft) * (tt - nodes[idx])
        return np.where(below, vals[0] * (tt - nodes[0]), partial)

    def integral(self, t1: ArrayLike, t2: ArrayLike) -> ArrayLike:
        """Exact integral over [t1, t2]."""
        out = np.asarray(self.antiderivative(t2)) - np.asarray(self.antiderivative(t1))
        if np.ndim(t1) == 0 and np.ndim(t2) == 0:
            return float(out)
        return out

    def absolute(self) -> "TimeCoefficient":
        """|f| as a coefficient of the same kind (zero crossings inserted as nodes)."""
        if self.kind != TABULATED:
            return TimeCoefficient(self.kind, tuple(abs(v) for v in self.values), self.breakpoints)
        nodes = list(self.breakpoints[:1])
        vals = list(self.values[:1])
        for (xa, fa), (xb, fb) in zip(
            zip(self.breakpoints, self.values), zip(self.breakpoints[1:], self.values[1:])
        ):
            if fa * fb < 0.0:
                nodes.append(xa + (xb - xa) * fa / (fa - fb))
                vals.append(0.0)
            nodes.append(xb)
            vals.append(fb)
        return TimeCoefficient.tabulated(nodes, [abs(v) for v in vals])

    def abs_integral(self, t1: float, t2: float) -> float:
        return float(self.absolute().integral(t1, t2))

    def squared_integral(self, t1: float, t2: float) -> float:
        """Exact integral of f(t)^2 over [t1, t2]."""
        if self.kind == CONSTANT:
            return self.values[0] ** 2 * (t2 - t1)
        points = self._partition(t1, t2)
        f = np.asarray(self(points))
        widths = np.diff(points)
        if self.kind == PIECEWISE:
            mids = np.asarray(self(0.5 * (points[1:] + points[:-1])))
            return float(np.sum(mids**2 * widths))
        return float(np.sum(widths * (f[:-1] ** 2 + f[:-1] * f[1:] + f[1:] ** 2) / 3.0))

    def _partition(self, t1: float, t2: float) -> np.ndarray:
        inner = [b for b in self.breakpoints if t1 < b < t2]
        return np.array([t1, *inner, t2], dtype=float)

    def nodes(self, t1: float, t2: float) -> np.ndarray:
        """Breakpoints or tabulation nodes inside (t1, t2)."""
        return np.array([b for b in self.breakpoints if t1 < b < t2], dtype=float)

    def extrema(self, t1: float, t2: float) -> Tuple[float, float]:
        """(min, max) of the coefficient over [t1, t2]."""
        points = self._partition(t1, t2)
        if self.kind == PIECEWISE:
            # Right-continuous: sample each piece once, including the one at t2.
            samples = np.concatenate((0.5 * (points[1:] + points[:-1]), [t2]))
            values = np.asarray(self(samples))
        else:
            values = np.asarray(self(points))
        return float(values.min()), float(values.max())

    def lipschitz(self, t1: float, t2: float) -> float:
        """Lipschitz modulus over [t1, t2]; infinite for a jump inside the interval."""
        if self.kind == CONSTANT:
            return 0.0
        if self.kind == PIECEWISE:
            lo, hi = self.extrema(t1, t2)
            return 0.0 if lo == hi else math.inf
        points = self._partition(t1, t2)
        f = np.asarray(self(points))
        return float(np.max(np.abs(np.diff(f) / np.diff(points))))

    # Serialization

    def to_json_value(self):
        if self.kind == CONSTANT:
            return self.values[0]
        key = "breakpoints" if self.kind == PIECEWISE else "nodes"
        return {"kind": self.kind, key: list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_json_value(cls, value, path: str = "coefficient") -> "TimeCoefficient":
        if isinstance(value, bool):
            raise ModelError(f"{path}: expected a number or coefficient object, got a boolean")
        if isinstance(value, (int, float)):
            return cls.constant(float(value))
        if not isinstance(value, dict):
            raise ModelError(f"{path}: expected a number or coefficient object")
        kind = value.get("kind")
        try:
            if kind == PIECEWISE:
                return cls.piecewise(value["breakpoints"], value["values"])
            if kind == TABULATED:
                return cls.tabulated(value["nodes"], value["values"])
            if kind == CONSTANT:
                return cls.constant(value["value"])
        except KeyError as e:
            raise ModelError(f"{path}: missing key {e}") from e
        except (TypeError, ValueError) as e:
            raise ModelError(f"{path}: {e}") from e
        raise ModelError(f"{path}: unknown coefficient kind '{kind}'")
