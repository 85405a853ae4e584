"""Strategies that can drive the wealth simulation.

A strategy maps the pre-jump state to the first-line retention u1(t, y1),
the second-line retention u2(t, y2) and the amount w(t, y2) held in the
risky asset. Evaluators receive a scalar t and an array of factor values.
"""

from dataclasses import dataclass
from typing import Callable, Protocol, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class Strategy(Protocol):
    def u1(self, t: float, y1: ArrayLike) -> ArrayLike: ...

    def u2(self, t: float, y2: ArrayLike) -> ArrayLike: ...

    def w(self, t: float, y2: ArrayLike) -> ArrayLike: ...


def _like(y: ArrayLike, value: float) -> ArrayLike:
    return np.full(np.shape(y), value) if np.ndim(y) else value


@dataclass(frozen=True)
class ConstantStrategy:
    """Fixed controls, e.g. no reinsurance and no investment."""

    u1_value: float = 1.0
    u2_value: float = 1.0
    w_value: float = 0.0

    def u1(self, t: float, y1: ArrayLike) -> ArrayLike:
        return _like(y1, self.u1_value)

    def u2(self, t: float, y2: ArrayLike) -> ArrayLike:
        return _like(y2, self.u2_value)

    def w(self, t: float, y2: ArrayLike) -> ArrayLike:
        return _like(y2, self.w_value)


@dataclass(frozen=True)
class FunctionStrategy:
    u1_func: Callable[[float, ArrayLike], ArrayLike]
    u2_func: Callable[[float, ArrayLike], ArrayLike]
    w_func: Callable[[float, ArrayLike], ArrayLike]

    def u1(self, t: float, y1: ArrayLike) -> ArrayLike:
        return self.u1_func(t, y1)

    def u2(self, t: float, y2: ArrayLike) -> ArrayLike:
        return self.u2_func(t, y2)

    def w(self, t: float, y2: ArrayLike) -> ArrayLike:
        return self.w_func(t, y2)


@dataclass(frozen=True)
class PerturbedStrategy:
    """base with w scaled by ``w_scale`` and the retentions shifted.

    Shifted retentions are clamped to [0, 1].
    """

    base: Strategy
    w_scale: float = 1.0
    u1_shift: float = 0.0
    u2_shift: float = 0.0

    def u1(self, t: float, y1: ArrayLike) -> ArrayLike:
        return np.clip(np.asarray(self.base.u1(t, y1)) + self.u1_shift, 0.0, 1.0)

    def u2(self, t: float, y2: ArrayLike) -> ArrayLike:
        return np.clip(np.asarray(self.base.u2(t, y2)) + self.u2_shift, 0.0, 1.0)

    def w(self, t: float, y2: ArrayLike) -> ArrayLike:
        return self.w_scale * np.asarray(self.base.w(t, y2))
