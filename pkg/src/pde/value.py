"""Value function assembled from the two line factors."""

import math
from dataclasses import dataclass

import numpy as np

from src.model.market import ModelConfig, accumulation_to_horizon
from src.pde.solver import PdeSolution


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """V(t, y1, y2, x) = exp(-gamma x B(t, T)) psi1(t, y1) psi2(t, y2).

    V is the minimal expected exponential loss E[exp(-gamma X_T)], so
    V(T, ., ., x) = exp(-gamma x) and V > 0.
    """

    cfg: ModelConfig
    psi1: PdeSolution
    psi2: PdeSolution

    def __call__(self, t, y1, y2, x):
        scale = self.cfg.gamma * np.asarray(accumulation_to_horizon(self.cfg, t))
        out = (
            np.exp(-scale * np.asarray(x, dtype=float))
            * np.asarray(self.psi1(t, y1))
            * np.asarray(self.psi2(t, y2))
        )
        return float(out) if np.ndim(out) == 0 else out

    def certainty_equivalent(self, t: float, y1: float, y2: float, x: float) -> float:
        """Sure terminal wealth with the same exponential loss as V."""
        return -math.log(self(t, y1, y2, x)) / self.cfg.gamma


def value_function(cfg: ModelConfig, psi1: PdeSolution, psi2: PdeSolution, t, y1, y2, x):
    """Evaluate V; raises OutOfRangeError when (t, y) leaves either grid."""
    return ValueFunction(cfg, psi1, psi2)(t, y1, y2, x)
