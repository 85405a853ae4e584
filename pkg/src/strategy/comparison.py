"""Effect of the common shock on the optimal strategy.

Each state is solved twice, with the configured jump and with K = 0, and the
expected orderings are recorded. Violations are data, never exceptions.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import structlog

from src.errors import ModelError
from src.log_utils import log_function_call
from src.model.coefficients import TimeCoefficient
from src.model.market import JumpFunction, ModelConfig
from src.model.premiums import PremiumPrinciple
from src.strategy.psi import market_terms
from src.strategy.solvers import (
    SignRegion,
    evp_closed_form,
    solve_second_line,
    solve_u1_star,
    w_star_bounds,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

BOUND_TOL = 1e-8

STATE_COLUMNS = (
    "t",
    "y",
    "u2_star",
    "w_star",
    "u2_no",
    "w_no",
    "sign_region",
    "region",
    "w_lower",
    "w_upper",
    "evp_bound",
)


@dataclass
class ComparisonReport:
    states: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)
    degenerate_states: int = 0
    ties_at_boundary: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "n_states": len(self.states),
            "degenerate_states": self.degenerate_states,
            "ties_at_boundary": self.ties_at_boundary,
            "violations": self.violations,
            "states": self.states,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def rows(self) -> List[List[Any]]:
        return [[state[c] for c in STATE_COLUMNS] for state in self.states]


def _violation(kind: str, t: float, y: float, **values: float) -> Dict[str, Any]:
    return {"kind": kind, "t": t, "y": y, **values}


def _compare_state(cfg: ModelConfig, no_shock: ModelConfig, t: float, y: float, report: ComparisonReport) -> None:
    m = market_terms(cfg, t)
    expected_jump = m.k * cfg.line2.claims.mean
    shock = solve_second_line(cfg, t, y)
    base = solve_second_line(no_shock, t, y)
    bounds = w_star_bounds(cfg, t, y)
    evp = cfg.line2.premium.kind == "expected_value"
    evp_bound = abs(m.k * evp_closed_form(cfg, t, y).w_bar) if evp else float("nan")

    report.states.append(
        {
            "t": t,
            "y": y,
            "u2_star": shock.u2_star,
            "w_star": shock.w_star,
            "u2_no": base.u2_star,
            "w_no": base.w_star,
            "sign_region": shock.sign_region.value,
            "region": shock.region.value,
            "w_lower": bounds.lower,
            "w_upper": bounds.upper,
            "evp_bound": evp_bound,
        }
    )
    # No expected jump: the orderings do not apply
    if expected_jump <= 0.0:
        report.degenerate_states += 1
        return

    if not shock.w_star < base.w_star:
        report.violations.append(
            _violation("w_star_not_below_no_shock", t, y, w_star=shock.w_star, w_no=base.w_star)
        )
    if not bounds.lower <= shock.w_star < bounds.upper:
        report.violations.append(
            _violation(
                "w_star_outside_bounds", t, y,
                w_star=shock.w_star, lower=bounds.lower, upper=bounds.upper,
            )
        )
    # both retentions clipped to the same end of [0, 1]
    tie = shock.u2_star == base.u2_star and shock.u2_star in (0.0, 1.0)
    if tie:
        report.ties_at_boundary += 1
    if shock.sign_region == SignRegion.SHORT:
        if shock.w_star >= 0.0:
            report.violations.append(_violation("sign_not_negative_on_C1", t, y, w_star=shock.w_star))
        if not tie and not shock.u2_star > base.u2_star:
            report.violations.append(
                _violation("u2_not_above_no_shock_on_C1", t, y, u2_star=shock.u2_star, u2_no=base.u2_star)
            )
    elif shock.sign_region == SignRegion.LONG:
        if shock.w_star <= 0.0:
            report.violations.append(_violation("sign_not_positive_on_C2", t, y, w_star=shock.w_star))
        if not tie and not shock.u2_star < base.u2_star:
            report.violations.append(
                _violation("u2_not_below_no_shock_on_C2", t, y, u2_star=shock.u2_star, u2_no=base.u2_star)
            )
    if evp and abs(shock.u2_star - base.u2_star) > evp_bound + BOUND_TOL:
        report.violations.append(
            _violation(
                "evp_retention_gap_exceeds_bound", t, y,
                gap=abs(shock.u2_star - base.u2_star), bound=evp_bound,
            )
        )


@log_function_call
def compare_shock_effect(
    cfg: ModelConfig, times: Sequence[float], ys: Sequence[float]
) -> ComparisonReport:
    """Compare the optimal second-line strategy with its no-shock counterpart.

    Expected on every state with E[K(t, Z)] > 0: w* < w_no; lower <= w* < upper;
    u2* > u2_no on C1 and u2* < u2_no on C2 (unless both sit on the same
    boundary of [0, 1]); under the expected-value principle
    |u2* - u2_no| <= k(t) |w-bar|.
    """
    report = ComparisonReport()
    no_shock = cfg.without_shock()
    for t in times:
        for y in ys:
            _compare_state(cfg, no_shock, float(t), float(y), report)
    if report.violations:
        logger.warning(f"Shock comparison found {len(report.violations)} violation(s)")
    structured_logger.info(
        "Shock comparison done",
        states=len(report.states),
        violations=len(report.violations),
        degenerate=report.degenerate_states,
    )
    return report


SWEEP_PARAMETERS = ("k", "theta_r", "lambda0", "gamma")


def with_parameter(cfg: ModelConfig, name: str, value: float) -> ModelConfig:
    """Copy of cfg with one sweep parameter replaced (line 2 where it applies)."""
    if name == "k":
        return dataclasses.replace(
            cfg, market=dataclasses.replace(cfg.market, jump=JumpFunction.multiplicative(value))
        )
    if name == "theta_r":
        premium = cfg.line2.premium
        new_premium = PremiumPrinciple(premium.kind, premium.theta, value, premium.custom)
        return dataclasses.replace(cfg, line2=dataclasses.replace(cfg.line2, premium=new_premium))
    if name == "lambda0":
        if cfg.line2.intensity.kind == "custom":
            logger.error("lambda0 sweep requested on a custom intensity")
            raise ModelError("A custom intensity has no base level to sweep; lambda0 needs a built-in kind")
        # the base level scales the factor response, which stays as configured
        intensity = dataclasses.replace(
            cfg.line2.intensity, base=TimeCoefficient.constant(value)
        )
        return dataclasses.replace(cfg, line2=dataclasses.replace(cfg.line2, intensity=intensity))
    if name == "gamma":
        return dataclasses.replace(
            cfg, preferences=dataclasses.replace(cfg.preferences, gamma=value)
        )
    raise ValueError(f"Unknown sweep parameter '{name}', expected one of {SWEEP_PARAMETERS}")


SWEEP_COLUMNS = ("value", "u1_star", "u2_star", "w_star", "u2_no", "w_no", "region", "sign_region")


@dataclass
class SweepResult:
    parameter: str
    t: float
    y1: float
    y2: float
    rows: List[List[Any]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def column(self, name: str) -> np.ndarray:
        return np.array([row[SWEEP_COLUMNS.index(name)] for row in self.rows], dtype=float)


@log_function_call
def sweep_parameter(
    cfg: ModelConfig, name: str, values: Sequence[float], t: float, y1: float, y2: float
) -> SweepResult:
    """Strategy summaries along a one-parameter family.

    Monotonicity checked: w* decreasing in k and lambda0 (when E[Z] > 0 and
    the shock is active); under the expected-value principle u2-bar
    increasing in theta_R.
    """
    result = SweepResult(name, t, y1, y2)
    ordered = sorted(float(v) for v in values)
    w_values: List[float] = []
    u_bars: List[float] = []
    for value in ordered:
        varied = with_parameter(cfg, name, value)
        first = solve_u1_star(varied, t, y1)
        second = solve_second_line(varied, t, y2)
        base = solve_second_line(varied.without_shock(), t, y2)
        result.rows.append(
            [
                value,
                first.u1_star,
                second.u2_star,
                second.w_star,
                base.u2_star,
                base.w_star,
                second.region.value,
                second.sign_region.value,
            ]
        )
        w_values.append(second.w_star)
        u_bars.append(second.u2_bar)

    # Pairwise checks over the sorted values
    shock_active = name == "k" or market_terms(cfg, t).k > 0.0
    if name in ("k", "lambda0") and shock_active:
        for (v_a, w_a), (v_b, w_b) in zip(zip(ordered, w_values), zip(ordered[1:], w_values[1:])):
            if v_b > v_a and not w_b < w_a:
                result.violations.append(
                    {"kind": f"w_star_not_decreasing_in_{name}", "from": v_a, "to": v_b, "w_from": w_a, "w_to": w_b}
                )
    if name == "theta_r" and cfg.line2.premium.kind == "expected_value":
        for (v_a, u_a), (v_b, u_b) in zip(zip(ordered, u_bars), zip(ordered[1:], u_bars[1:])):
            if v_b > v_a and not u_b > u_a:
                result.violations.append(
                    {"kind": "u2_bar_not_increasing_in_theta_r", "from": v_a, "to": v_b, "u_from": u_a, "u_to": u_b}
                )
    return result
