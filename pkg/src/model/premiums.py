"""Insurance and reinsurance premium principles.

Built-in principles are polynomials in the retention u and are evaluated with
the same formula for u outside [0, 1], which is the extension the second-line
solver relies on.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from src.errors import ModelError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

EXPECTED_VALUE = "expected_value"
VARIANCE = "variance"
CUSTOM = "custom"
KINDS = (EXPECTED_VALUE, VARIANCE, CUSTOM)


@dataclass(frozen=True)
class CustomPremium:
    """User-supplied premium rates.

    Each callable receives (t, y) or (t, y, u) as floats or broadcastable
    numpy arrays. The derivatives are not approximated numerically, so they
    must be supplied and must agree with ``q``.
    """

    c: Callable[..., ArrayLike]
    q: Callable[..., ArrayLike]
    dq: Callable[..., ArrayLike]
    d2q: Callable[..., ArrayLike]


@dataclass(frozen=True)
class PremiumPrinciple:
    """Premium principle of one insurance line.

    For both built-in kinds the rates scale with the claim intensity lam:

    * expected value: c = (1+theta) E[Z] lam, q = (1+theta_r) E[Z] (1-u) lam
    * variance: c = (E[Z] + theta E[Z^2]) lam,
      q = (E[Z] (1-u) + theta_r E[Z^2] (1-u)^2) lam
    """

    kind: str
    theta: float = 0.0
    theta_r: float = 0.0
    custom: Optional[CustomPremium] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ModelError(f"Unknown premium principle '{self.kind}'")
        if self.kind == CUSTOM:
            if self.custom is None:
                raise ModelError("A custom premium principle needs its evaluators")
            return
        for name, value in (("theta", self.theta), ("theta_r", self.theta_r)):
            if not (math.isfinite(value) and value > 0.0):
                raise ModelError(f"Safety loading {name} must be positive, got {value}")

    @classmethod
    def expected_value(cls, theta: float, theta_r: float) -> "PremiumPrinciple":
        return cls(EXPECTED_VALUE, float(theta), float(theta_r))

    @classmethod
    def variance(cls, theta: float, theta_r: float) -> "PremiumPrinciple":
        return cls(VARIANCE, float(theta), float(theta_r))

    @classmethod
    def from_callables(
        cls,
        c: Callable[..., ArrayLike],
        q: Callable[..., ArrayLike],
        dq: Callable[..., ArrayLike],
        d2q: Callable[..., ArrayLike],
    ) -> "PremiumPrinciple":
        return cls(CUSTOM, custom=CustomPremium(c, q, dq, d2q))

    @property
    def is_builtin(self) -> bool:
        return self.kind != CUSTOM

    def insurance_rate(self, t, y, lam, m1: float, m2: float) -> ArrayLike:
        """c(t, y)."""
        if self.kind == EXPECTED_VALUE:
            return (1.0 + self.theta) * m1 * lam
        if self.kind == VARIANCE:
            return (m1 + self.theta * m2) * lam
        return self.custom.c(t, y)

    def reinsurance_rate(self, t, y, u, lam, m1: float, m2: float) -> ArrayLike:
        """q(t, y, u)."""
        if self.kind == EXPECTED_VALUE:
            return (1.0 + self.theta_r) * m1 * (1.0 - u) * lam
        if self.kind == VARIANCE:
            return (m1 * (1.0 - u) + self.theta_r * m2 * (1.0 - u) ** 2) * lam
        return self.custom.q(t, y, u)

    def reinsurance_rate_du(self, t, y, u, lam, m1: float, m2: float) -> ArrayLike:
        """dq/du."""
        if self.kind == EXPECTED_VALUE:
            return -(1.0 + self.theta_r) * m1 * lam + 0.0 * u
        if self.kind == VARIANCE:
            return -(m1 + 2.0 * self.theta_r * m2 * (1.0 - u)) * lam
        return self.custom.dq(t, y, u)

    def reinsurance_rate_du2(self, t, y, u, lam, m1: float, m2: float) -> ArrayLike:
        """d^2q/du^2."""
        if self.kind == EXPECTED_VALUE:
            return 0.0 * lam + 0.0 * u
        if self.kind == VARIANCE:
            return 2.0 * self.theta_r * m2 * lam + 0.0 * u
        return self.custom.d2q(t, y, u)

    def to_dict(self) -> dict:
        if self.kind == CUSTOM:
            raise ModelError("Custom premium principles cannot be serialized")
        return {"kind": self.kind, "theta": self.theta, "theta_r": self.theta_r}
