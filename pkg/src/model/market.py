"""Insurance lines, the financial market and the full model configuration."""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from src.errors import ModelError, OutOfRangeError
from src.model.claims import ClaimDistribution
from src.model.coefficients import TimeCoefficient
from src.model.premiums import PremiumPrinciple

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Tolerance for time arguments that land a rounding error outside [0, T]
TIME_TOL = 1e-12


@dataclass(frozen=True)
class IntensityModel:
    """Claim-arrival intensity lam(t, y) = base(t) * f(y).

    Kinds:
        constant: f(y) = 1
        exponential: f(y) = exp(beta * y)
        logistic: f(y) = low + (high - low) / (1 + exp(-beta * y))
        custom: lam(t, y) = func(t, y)
    """

    kind: str
    base: TimeCoefficient = TimeCoefficient.constant(1.0)
    beta: float = 1.0
    low: float = 1.0
    high: float = 2.0
    func: Optional[Callable[..., ArrayLike]] = None

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "exponential", "logistic", "custom"):
            raise ModelError(f"Unknown intensity kind '{self.kind}'")
        if self.kind == "custom":
            if self.func is None:
                raise ModelError("A custom intensity needs a callable")
            return
        if min(self.base.values) < 0.0:
            raise ModelError("Intensity base level must be non-negative")
        if self.kind == "logistic" and not (0.0 <= self.low and self.low <= self.high):
            raise ModelError(f"Logistic range needs 0 <= low <= high, got ({self.low}, {self.high})")
        if not math.isfinite(self.beta):
            raise ModelError("Intensity slope beta must be finite")

    def factor(self, y: ArrayLike) -> ArrayLike:
        yy = np.asarray(y, dtype=float)
        if self.kind == "constant":
            out = np.ones_like(yy)
        elif self.kind == "exponential":
            out = np.exp(self.beta * yy)
        else:
            out = self.low + (self.high - self.low) / (1.0 + np.exp(-self.beta * yy))
        return float(out) if np.ndim(y) == 0 else out

    def __call__(self, t: ArrayLike, y: ArrayLike) -> ArrayLike:
        if self.kind == "custom":
            return self.func(t, y)
        out = np.asarray(self.base(t)) * np.asarray(self.factor(y))
        return float(out) if np.ndim(out) == 0 else out

    @property
    def y_dependent(self) -> bool:
        return self.kind != "constant"

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ModelError("Custom intensities cannot be serialized")
        out = {"kind": self.kind, "base": self.base.to_json_value()}
        if self.kind in ("exponential", "logistic"):
            out["beta"] = self.beta
        if self.kind == "logistic":
            out.update(low=self.low, high=self.high)
        return out


@dataclass(frozen=True)
class InsuranceLine:
    """One line of business: arrivals, claim sizes, premia and its factor.

    The factor follows dY = b(t) dt + a(t) dW with Y_0 = y0, and ``bound`` is
    the user-declared dominating intensity delta(t).
    """

    intensity: IntensityModel
    claims: ClaimDistribution
    premium: PremiumPrinciple
    drift: TimeCoefficient
    vol: TimeCoefficient
    y0: float
    bound: TimeCoefficient

    def __post_init__(self) -> None:
        if not math.isfinite(self.y0):
            raise ModelError(f"Initial factor value must be finite, got {self.y0}")
        if min(self.bound.values) < 0.0:
            raise ModelError("Intensity bound delta must be non-negative")

    def lam(self, t: ArrayLike, y: ArrayLike) -> ArrayLike:
        return self.intensity(t, y)

    def c(self, t: ArrayLike, y: ArrayLike) -> ArrayLike:
        return self.premium.insurance_rate(
            t, y, self.lam(t, y), self.claims.mean, self.claims.second_moment
        )

    def q(self, t: ArrayLike, y: ArrayLike, u: ArrayLike) -> ArrayLike:
        return self.premium.reinsurance_rate(
            t, y, u, self.lam(t, y), self.claims.mean, self.claims.second_moment
        )

    def dq(self, t: ArrayLike, y: ArrayLike, u: ArrayLike) -> ArrayLike:
        return self.premium.reinsurance_rate_du(
            t, y, u, self.lam(t, y), self.claims.mean, self.claims.second_moment
        )

    def d2q(self, t: ArrayLike, y: ArrayLike, u: ArrayLike) -> ArrayLike:
        return self.premium.reinsurance_rate_du2(
            t, y, u, self.lam(t, y), self.claims.mean, self.claims.second_moment
        )

    @property
    def is_y_independent(self) -> bool:
        """Intensity and premia do not depend on the factor."""
        return not self.intensity.y_dependent and self.premium.is_builtin


@dataclass(frozen=True)
class JumpFunction:
    """Asset jump K(t, z) at a line-2 claim: zero, or k(t) * z."""

    kind: str = "none"
    k: TimeCoefficient = TimeCoefficient.constant(0.0)

    def __post_init__(self) -> None:
        if self.kind not in ("none", "multiplicative"):
            raise ModelError(f"Unknown jump function kind '{self.kind}'")
        if min(self.k.values) < 0.0:
            raise ModelError("Jump slope k(t) must be non-negative")

    @classmethod
    def none(cls) -> "JumpFunction":
        return cls("none")

    @classmethod
    def multiplicative(cls, k: Union[float, TimeCoefficient]) -> "JumpFunction":
        if not isinstance(k, TimeCoefficient):
            k = TimeCoefficient.constant(k)
        return cls("multiplicative", k)

    def slope(self, t: ArrayLike) -> ArrayLike:
        """k(t); zero for the no-jump kind."""
        if self.kind == "none":
            return 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else 0.0
        return self.k(t)

    def __call__(self, t: ArrayLike, z: ArrayLike) -> ArrayLike:
        return np.asarray(self.slope(t)) * np.asarray(z)

    def to_dict(self) -> dict:
        if self.kind == "none":
            return {"kind": "none"}
        return {"kind": self.kind, "k": self.k.to_json_value()}


@dataclass(frozen=True)
class FinancialMarket:
    r: TimeCoefficient
    mu: TimeCoefficient
    sigma: TimeCoefficient
    jump: JumpFunction = JumpFunction()
    p0: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p0) and self.p0 > 0.0):
            raise ModelError(f"Initial asset price must be positive, got {self.p0}")
        if min(self.sigma.values) < 0.0:
            raise ModelError("Volatility sigma(t) must be non-negative")


@dataclass(frozen=True)
class Preferences:
    gamma: float
    horizon: float
    initial_wealth: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ModelError(f"Risk aversion must be positive, got {self.gamma}")
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ModelError(f"Horizon must be positive, got {self.horizon}")
        if not (math.isfinite(self.initial_wealth) and self.initial_wealth >= 0.0):
            raise ModelError(f"Initial wealth must be non-negative, got {self.initial_wealth}")


@dataclass(frozen=True)
class ModelConfig:
    """The coupled market. Line 2 is the line whose claims move the asset."""

    line1: InsuranceLine
    line2: InsuranceLine
    market: FinancialMarket
    preferences: Preferences

    def __post_init__(self) -> None:
        horizon = self.preferences.horizon
        coefficients = {
            "market.r": self.market.r,
            "market.mu": self.market.mu,
            "market.sigma": self.market.sigma,
            "market.jump.k": self.market.jump.k,
        }
        for index, line in ((1, self.line1), (2, self.line2)):
            coefficients.update(
                {
                    f"line{index}.drift": line.drift,
                    f"line{index}.vol": line.vol,
                    f"line{index}.bound": line.bound,
                }
            )
            if line.intensity.kind != "custom":
                coefficients[f"line{index}.intensity.base"] = line.intensity.base
        for name, coefficient in coefficients.items():
            if not coefficient.covers(horizon):
                raise ModelError(f"{name} is not defined on all of [0, {horizon}]")
        if self.market.jump.kind == "multiplicative":
            d = self.line2.claims.support_bound
            k_max = self.market.jump.k.extrema(0.0, horizon)[1]
            if math.isfinite(d) and k_max * d >= 1.0:
                raise ModelError(
                    f"Jump K(t, z) = k(t) z must stay below 1: max k = {k_max}, D = {d}"
                )

    @property
    def horizon(self) -> float:
        return self.preferences.horizon

    @property
    def gamma(self) -> float:
        return self.preferences.gamma

    def line(self, index: int) -> InsuranceLine:
        if index == 1:
            return self.line1
        if index == 2:
            return self.line2
        raise ModelError(f"Line index must be 1 or 2, got {index}")

    def without_shock(self) -> "ModelConfig":
        """The K = 0 counterfactual of this configuration."""
        return dataclasses.replace(
            self, market=dataclasses.replace(self.market, jump=JumpFunction.none())
        )

    def check_time(self, *times: float) -> None:
        for t in times:
            if not (-TIME_TOL <= t <= self.horizon + TIME_TOL):
                logger.error(f"Time {t} outside [0, {self.horizon}]")
                raise OutOfRangeError(f"Time {t} outside [0, {self.horizon}]")


def accumulation_factor(cfg: ModelConfig, t1: float, t2: float) -> float:
    """B(t1, t2) = exp(int_{t1}^{t2} r(s) ds).

    Raises:
        OutOfRangeError: Unless 0 <= t1 <= t2 <= T.
    """
    cfg.check_time(t1, t2)
    if t1 > t2 + TIME_TOL:
        logger.error(f"accumulation_factor needs t1 <= t2, got {t1} > {t2}")
        raise OutOfRangeError(f"accumulation_factor needs t1 <= t2, got {t1} > {t2}")
    return math.exp(cfg.market.r.integral(t1, t2))


def accumulation_to_horizon(cfg: ModelConfig, t: ArrayLike) -> ArrayLike:
    """B(t, T) for scalar or array t, without range checks."""
    # antiderivative form is elementwise in t
    r = cfg.market.r
    out = np.exp(r.antiderivative(cfg.horizon) - np.asarray(r.antiderivative(t)))
    return float(out) if np.ndim(t) == 0 else out


def accumulation_bound(cfg: ModelConfig) -> float:
    """B-bar = exp(int_0^T |r(s)| ds), an upper bound for every B(t1, t2)."""
    return math.exp(cfg.market.r.abs_integral(0.0, cfg.horizon))


def risk_scale(cfg: ModelConfig, t: ArrayLike) -> ArrayLike:
    """gamma * B(t, T), the effective risk aversion at time t."""
    return cfg.gamma * accumulation_to_horizon(cfg, t)
