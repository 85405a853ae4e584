"""Pointwise optimal reinsurance and investment.

Line 1 is a one-dimensional convex problem on [0, 1]. Line 2 couples the
retention u2 and the investment w through the shock integral; its
unconstrained stationary point is found by nested root finding (inner u for
fixed w, outer w) and then projected onto u2 in [0, 1].
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from src.errors import DivergentMomentError, PreconditionError
from src.model.claims import tilted_moment, tilted_moment_or_inf
from src.model.market import ModelConfig
from src.strategy.psi import (
    H,
    H_tilde,
    first_line_foc,
    first_line_foc_du,
    foc_jacobian,
    market_terms,
)
from src.strategy.roots import (
    FTOL,
    RootResult,
    bracket_increasing,
    safeguarded_newton,
)

logger = logging.getLogger(__name__)

# inner solves are tighter so the outer residual is not polluted
INNER_FTOL = 1e-12
CONVEXITY_SAMPLES = np.linspace(0.0, 1.0, 5)


class Region(str, Enum):
    FULL_REINSURANCE = "A0"
    NULL_REINSURANCE = "A1"
    INTERIOR = "interior"


class SignRegion(str, Enum):
    SHORT = "C1"
    LONG = "C2"
    NEITHER = "neither"


@dataclass(frozen=True)
class FirstLineSolution:
    u1_star: float
    region: Region
    residual: float


@dataclass(frozen=True)
class SecondLineSolution:
    u2_star: float
    w_star: float
    region: Region
    sign_region: SignRegion
    h_residual: float
    h_tilde_residual: float
    u2_bar: float
    w_bar: float


@dataclass(frozen=True)
class WStarBounds:
    upper: float
    lower: float
    strict_upper: bool
    sign: str


@dataclass(frozen=True)
class EvpClosedForm:
    phi_star: float
    w_bar: float
    u2_bar: float
    u2_star: float
    w_star: float
    region: Region


@dataclass(frozen=True)
class NoShockStrategy:
    u1: float
    u2_no: float
    w_no: float
    region: Region


def _check_convexity(cfg: ModelConfig, index: int, t: float, y: float) -> None:
    line = cfg.line(index)
    curvature = np.asarray(line.d2q(t, y, CONVEXITY_SAMPLES))
    if np.any(curvature < -1e-12):
        logger.error(f"Reinsurance premium of line {index} is not convex at t={t}, y={y}")
        raise PreconditionError(
            f"Premium of line {index} must be convex in u (min d2q/du2 = {curvature.min():.3g})"
        )


def _check_intensity(cfg: ModelConfig, index: int, t: float, y: float) -> float:
    lam = float(cfg.line(index).lam(t, y))
    if not lam > 0.0:
        logger.error(f"Non-positive intensity {lam} on line {index} at t={t}, y={y}")
        raise PreconditionError(f"Intensity of line {index} must be positive, got {lam}")
    return lam


def no_shock_investment(cfg: ModelConfig, t: float) -> float:
    """(mu - r) / (gamma B(t, T) sigma^2), the investment without common shock."""
    m = market_terms(cfg, t)
    if m.sigma2 <= 0.0:
        logger.error(f"sigma(t) = 0 at t={t}")
        raise PreconditionError(f"Investment needs sigma(t) > 0, got 0 at t={t}")
    return m.excess / (m.gb * m.sigma2)


def solve_u1_star(cfg: ModelConfig, t: float, y1: float) -> FirstLineSolution:
    """Optimal first-line retention.

    A0 (full reinsurance) when dPsi_1/du >= 0 at u = 0, A1 (no reinsurance)
    when dPsi_1/du <= 0 at u = 1, otherwise the interior root.

    Raises:
        PreconditionError: If the premium is not convex in u.
        BracketError: If the sign tests are inconsistent with a root in (0, 1).
    """
    cfg.check_time(t)
    _check_convexity(cfg, 1, t, y1)
    _check_intensity(cfg, 1, t, y1)

    def foc(u: float) -> float:
        return first_line_foc(cfg, t, y1, u)

    # Psi_1 is convex in u, so the sign of its slope at the ends decides the region
    at_zero = foc(0.0)
    if at_zero >= 0.0:
        return FirstLineSolution(0.0, Region.FULL_REINSURANCE, abs(at_zero))
    try:
        at_one = foc(1.0)
    except DivergentMomentError:
        at_one = math.inf
    # a divergent moment at u = 1 counts as a positive slope
    if at_one <= 0.0:
        return FirstLineSolution(1.0, Region.NULL_REINSURANCE, abs(at_one))
    result = safeguarded_newton(
        foc, lambda u: first_line_foc_du(cfg, t, y1, u), 0.0, 1.0, ftol=FTOL
    )
    return FirstLineSolution(result.root, Region.INTERIOR, result.residual)


def _w_tilde_result(cfg: ModelConfig, t: float, y2: float, u2: float) -> RootResult:
    w0 = no_shock_investment(cfg, t)
    m = market_terms(cfg, t)
    # Without the shock H_tilde is linear in w with root w0
    if m.k == 0.0:
        return RootResult(w0, 0.0, 0)

    def f(w: float) -> float:
        return float(H_tilde(cfg, t, y2, u2, w))

    def df(w: float) -> float:
        return foc_jacobian(cfg, t, y2, u2, w).ht_w

    # The shock term is positive, so the root lies below w0.
    lo, hi = bracket_increasing(f, w0 - 1.0, w0)
    return safeguarded_newton(f, df, lo, hi, ftol=FTOL)


def solve_w_tilde(cfg: ModelConfig, t: float, y2: float, u2: float) -> float:
    """Unique root in w of H_tilde(t, y2, u2, .); u2 may lie outside [0, 1]."""
    cfg.check_time(t)
    _check_intensity(cfg, 2, t, y2)
    return _w_tilde_result(cfg, t, y2, u2).root


def _inner_retention(
    cfg: ModelConfig, t: float, y2: float, w: float, guess: float
) -> RootResult:
    """u-tilde(w): root in u of H(t, y2, u, w), increasing in u."""

    def f(u: float) -> float:
        return float(H(cfg, t, y2, u, w))

    def df(u: float) -> float:
        return foc_jacobian(cfg, t, y2, u, w).h_u

    # Warm start from the previous outer iterate
    lo, hi = bracket_increasing(f, guess - 1.0, guess + 1.0)
    return safeguarded_newton(f, df, lo, hi, ftol=INNER_FTOL)


def classify_sign_region(cfg: ModelConfig, t: float, y2: float) -> SignRegion:
    """C1: mu - r < lam E[K]; C2: mu - r > lam E[K e^{gb Z}]; else neither."""
    m = market_terms(cfg, t)
    line = cfg.line2
    lam = float(line.lam(t, y2))
    expected_shock = lam * m.k * line.claims.mean
    tilted_shock = lam * m.k * tilted_moment_or_inf(line.claims, m.gb, 1) if m.k else 0.0
    if m.excess < expected_shock:
        return SignRegion.SHORT
    if m.excess > tilted_shock:
        return SignRegion.LONG
    return SignRegion.NEITHER


def _stationary_point(cfg: ModelConfig, t: float, y2: float) -> tuple:
    """Unconstrained root (u-bar, w-bar) of H = H_tilde = 0."""
    w0 = no_shock_investment(cfg, t)
    m = market_terms(cfg, t)
    if m.k == 0.0:
        inner = _inner_retention(cfg, t, y2, w0, 0.5)
        return inner.root, w0

    # The inner retention root is reused as the next starting guess
    state = {"u": 0.5}

    def outer(w: float) -> float:
        inner = _inner_retention(cfg, t, y2, w, state["u"])
        state["u"] = inner.root
        return float(H_tilde(cfg, t, y2, inner.root, w))

    # Total derivative of H_tilde along the curve H = 0
    def outer_slope(w: float) -> float:
        jac = foc_jacobian(cfg, t, y2, state["u"], w)
        return jac.ht_w - jac.ht_u * jac.h_w / jac.h_u

    lo, hi = bracket_increasing(outer, w0 - 1.0, w0)
    w_bar = safeguarded_newton(outer, outer_slope, lo, hi, ftol=FTOL).root
    u_bar = _inner_retention(cfg, t, y2, w_bar, state["u"]).root
    return u_bar, w_bar


def solve_second_line(cfg: ModelConfig, t: float, y2: float) -> SecondLineSolution:
    """Optimal (u2*, w*) for the line coupled to the asset.

    Raises:
        PreconditionError: Non-convex premium, zero intensity or sigma(t) = 0.
        BracketError: If a root bracket cannot be found.
        ConvergenceError: If an iteration limit is reached.
    """
    cfg.check_time(t)
    _check_convexity(cfg, 2, t, y2)
    _check_intensity(cfg, 2, t, y2)
    # Unconstrained stationary point, then projection of u onto [0, 1] with w re-solved
    u_bar, w_bar = _stationary_point(cfg, t, y2)
    if u_bar <= 0.0:
        u_star, region = 0.0, Region.FULL_REINSURANCE
        w_star = _w_tilde_result(cfg, t, y2, 0.0).root
    elif u_bar >= 1.0:
        u_star, region = 1.0, Region.NULL_REINSURANCE
        w_star = _w_tilde_result(cfg, t, y2, 1.0).root
    else:
        u_star, w_star, region = u_bar, w_bar, Region.INTERIOR
    return SecondLineSolution(
        u2_star=u_star,
        w_star=w_star,
        region=region,
        sign_region=classify_sign_region(cfg, t, y2),
        h_residual=abs(float(H(cfg, t, y2, u_star, w_star))),
        h_tilde_residual=abs(float(H_tilde(cfg, t, y2, u_star, w_star))),
        u2_bar=u_bar,
        w_bar=w_bar,
    )


def w_star_bounds(cfg: ModelConfig, t: float, y2: float) -> WStarBounds:
    """Bounds on the optimal investment and its sign.

    upper = (mu - r) / (gb sigma^2), strict when E[K(t, Z)] > 0;
    lower = min(0, upper - delta(t) E[e^{gb Z}] / (gb sigma^2)).

    Raises:
        DivergentMomentError: If E[e^{gb Z}] is infinite.
    """
    cfg.check_time(t)
    upper = no_shock_investment(cfg, t)
    m = market_terms(cfg, t)
    line = cfg.line2
    shock = float(tilted_moment(line.claims, m.gb, 0))
    lower = min(0.0, upper - float(line.bound(t)) * shock / (m.gb * m.sigma2))
    sign = {
        SignRegion.SHORT: "negative",
        SignRegion.LONG: "positive",
        SignRegion.NEITHER: "unknown",
    }[classify_sign_region(cfg, t, y2)]
    return WStarBounds(upper, lower, m.k * line.claims.mean > 0.0, sign)


def _phi_star(cfg: ModelConfig, t: float) -> float:
    """Root of E[Z e^{gb phi Z}] = (1 + theta_R) E[Z]."""
    line = cfg.line2
    m = market_terms(cfg, t)
    target = (1.0 + line.premium.theta_r) * line.claims.mean

    def f(phi: float) -> float:
        return float(tilted_moment(line.claims, m.gb * phi, 1)) - target

    def df(phi: float) -> float:
        return m.gb * float(tilted_moment(line.claims, m.gb * phi, 2))

    lo, hi = bracket_increasing(f, 0.0, 1.0)
    return safeguarded_newton(f, df, lo, hi, ftol=FTOL).root


def evp_closed_form(cfg: ModelConfig, t: float, y2: float) -> EvpClosedForm:
    """Second-line strategy under the expected-value principle.

    phi* is deterministic; w-bar = (mu - r - lam k (1+theta_R) E[Z]) / (gb sigma^2)
    and u-bar = phi* - w-bar k, then projected onto [0, 1].

    Raises:
        PreconditionError: If line 2 does not use the expected-value principle.
    """
    cfg.check_time(t)
    line = cfg.line2
    if line.premium.kind != "expected_value":
        raise PreconditionError(
            f"Closed form needs the expected-value principle on line 2, got {line.premium.kind}"
        )
    lam = _check_intensity(cfg, 2, t, y2)
    m = market_terms(cfg, t)
    phi = _phi_star(cfg, t)
    loading = (1.0 + line.premium.theta_r) * line.claims.mean
    w_bar = no_shock_investment(cfg, t) - lam * m.k * loading / (m.gb * m.sigma2)
    u_bar = phi - w_bar * m.k
    if u_bar <= 0.0:
        return EvpClosedForm(
            phi, w_bar, u_bar, 0.0, solve_w_tilde(cfg, t, y2, 0.0), Region.FULL_REINSURANCE
        )
    if u_bar >= 1.0:
        return EvpClosedForm(
            phi, w_bar, u_bar, 1.0, solve_w_tilde(cfg, t, y2, 1.0), Region.NULL_REINSURANCE
        )
    return EvpClosedForm(phi, w_bar, u_bar, u_bar, w_bar, Region.INTERIOR)


def no_shock_strategy(cfg: ModelConfig, t: float, y1: float, y2: float) -> NoShockStrategy:
    """Optimal strategy of the K = 0 counterfactual."""
    u1 = solve_u1_star(cfg, t, y1).u1_star
    second = solve_second_line(cfg.without_shock(), t, y2)
    return NoShockStrategy(u1, second.u2_star, second.w_star, second.region)


def h_curve(cfg: ModelConfig, t: float, phis: Sequence[float]) -> np.ndarray:
    """phi -> E[Z e^{gb phi Z}] for the line-2 claims."""
    m = market_terms(cfg, t)
    return np.asarray(tilted_moment(cfg.line2.claims, m.gb * np.asarray(phis, dtype=float), 1))


def h_tilde_curve(
    cfg: ModelConfig, t: float, y2: float, u2: float, ws: Sequence[float]
) -> np.ndarray:
    """w -> H_tilde(t, y2, u2, w)."""
    return np.asarray(H_tilde(cfg, t, y2, u2, np.asarray(ws, dtype=float)))


@dataclass(frozen=True)
class StrategyPoint:
    u1: float
    u2: float
    w: float
    region1: Region
    region2: Region
    sign_region: SignRegion


def solve_strategy_point(
    cfg: ModelConfig, t: float, y1: float, y2: float, first: Optional[FirstLineSolution] = None
) -> StrategyPoint:
    # The two lines separate; only line 2 couples to the asset
    first = first or solve_u1_star(cfg, t, y1)
    second = solve_second_line(cfg, t, y2)
    return StrategyPoint(
        first.u1_star,
        second.u2_star,
        second.w_star,
        first.region,
        second.region,
        second.sign_region,
    )
