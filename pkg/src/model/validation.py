"""Grid-based validators for the standing model assumptions.

Validators never raise on a violated assumption: each check becomes an entry
of a ValidationReport, with the worst sampled point when it fails.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog
from scipy import integrate

from src.errors import DivergentMomentError
from src.log_utils import log_function_call
from src.model.claims import tilted_moment
from src.model.market import (
    InsuranceLine,
    ModelConfig,
    accumulation_bound,
    accumulation_to_horizon,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Factor grids extend this many standard deviations around y0
GRID_STD_WIDTH = 5.0
# Probability mass left out when sampling claim sizes of unbounded support
CLAIM_TAIL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    worst_point: Optional[Dict[str, float]] = None
    required: bool = True

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "passed": self.passed,
            "required": self.required,
            "detail": self.detail,
        }
        if self.value is not None:
            out["value"] = self.value
        if self.worst_point is not None:
            out["worst_point"] = self.worst_point
        return out


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    checks: List[CheckResult]
    metrics: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.required and not c.passed]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(f"No check named '{name}' in report for {self.subject}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "metrics": dict(self.metrics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def to_text(self) -> str:
        lines = [f"Validation report: {self.subject} ({'PASS' if self.passed else 'FAIL'})"]
        for c in self.checks:
            status = "ok" if c.passed else ("FAIL" if c.required else "warn")
            line = f"  [{status:>4}] {c.name}"
            if c.value is not None:
                line += f" = {c.value:.6g}"
            if c.detail:
                line += f": {c.detail}"
            if c.worst_point and not c.passed:
                point = ", ".join(f"{k}={v:.6g}" for k, v in c.worst_point.items())
                line += f" (worst at {point})"
            lines.append(line)
        for key, value in self.metrics.items():
            lines.append(f"  {key}: {value:.6g}")
        return "\n".join(lines)

    @staticmethod
    def merge(subject: str, reports: Sequence["ValidationReport"]) -> "ValidationReport":
        checks: List[CheckResult] = []
        metrics: Dict[str, float] = {}
        for report in reports:
            checks.extend(report.checks)
            metrics.update(report.metrics)
        return ValidationReport(subject, checks, metrics)


@dataclass(frozen=True)
class SamplingGrid:
    t: np.ndarray
    y: np.ndarray
    u: np.ndarray

    def __post_init__(self) -> None:
        if min(len(self.t), len(self.y), len(self.u)) == 0:
            raise ValueError("Sampling grid must be non-empty in t, y and u")


def time_samples(cfg: ModelConfig, count: int = 21) -> np.ndarray:
    """Uniform times on [0, T] plus every coefficient node inside."""
    horizon = cfg.horizon
    nodes = [np.linspace(0.0, horizon, count)]
    for coefficient in (cfg.market.r, cfg.market.mu, cfg.market.sigma, cfg.market.jump.k):
        nodes.append(coefficient.nodes(0.0, horizon))
    for line in (cfg.line1, cfg.line2):
        for coefficient in (line.vol, line.drift, line.bound):
            nodes.append(coefficient.nodes(0.0, horizon))
        if line.intensity.kind != "custom":
            nodes.append(line.intensity.base.nodes(0.0, horizon))
    return np.unique(np.concatenate(nodes))


def factor_half_width(cfg: ModelConfig, line: InsuranceLine, n_std: float = GRID_STD_WIDTH) -> float:
    a_max = max(abs(v) for v in line.vol.extrema(0.0, cfg.horizon))
    return n_std * a_max * math.sqrt(cfg.horizon)


def default_sampling_grid(
    cfg: ModelConfig, line: InsuranceLine, n_t: int = 21, n_y: int = 41, n_u: int = 21
) -> SamplingGrid:
    """[0, T] x [y0 +- 5 max|a| sqrt(T)] x [0, 1]."""
    width = factor_half_width(cfg, line)
    y = np.array([line.y0]) if width == 0.0 else np.linspace(line.y0 - width, line.y0 + width, n_y)
    return SamplingGrid(time_samples(cfg, n_t), y, np.linspace(0.0, 1.0, n_u))


def _worst(values: np.ndarray, axes: Dict[str, np.ndarray], lowest: bool = True) -> Dict[str, float]:
    index = np.unravel_index(np.argmin(values) if lowest else np.argmax(values), values.shape)
    point = {name: float(axis[i]) for (name, axis), i in zip(axes.items(), index)}
    point["value"] = float(values[index])
    return point


def _sign_check(
    name: str, margin: np.ndarray, axes: Dict[str, np.ndarray], strict: bool, detail: str,
    required: bool = True,
) -> CheckResult:
    """Pass when margin >= 0 (or > 0 if strict) on every sample."""
    ok = bool(np.all(margin > 0.0) if strict else np.all(margin >= 0.0))
    return CheckResult(
        name,
        ok,
        detail,
        value=float(np.min(margin)),
        worst_point=_worst(margin, axes),
        required=required,
    )


@log_function_call
def validate_premium(line: InsuranceLine, grid: SamplingGrid) -> ValidationReport:
    """Check the premium-principle conditions on a (t, y, u) grid.

    Checks: q(t,y,1) = 0, q(t,y,0) > c(t,y), dq/du <= 0, d2q/du2 >= 0.
    Informational: c(t,y) exceeds the expected loss rate lam(t,y) E[Z].
    """
    tt, yy = np.meshgrid(grid.t, grid.y, indexing="ij")
    t3, y3, u3 = np.meshgrid(grid.t, grid.y, grid.u, indexing="ij")
    axes2 = {"t": grid.t, "y": grid.y}
    axes3 = {"t": grid.t, "y": grid.y, "u": grid.u}

    c = np.broadcast_to(line.c(tt, yy), tt.shape)
    q0 = np.broadcast_to(line.q(tt, yy, 0.0), tt.shape)
    q1 = np.broadcast_to(line.q(tt, yy, 1.0), tt.shape)
    dq = np.broadcast_to(line.dq(t3, y3, u3), t3.shape)
    d2q = np.broadcast_to(line.d2q(t3, y3, u3), t3.shape)
    scale = max(1.0, float(np.max(np.abs(q0))))

    checks = [
        _sign_check(
            "null_reinsurance_free",
            1e-12 * scale - np.abs(q1),
            axes2,
            strict=False,
            detail="q(t, y, 1) = 0",
        ),
        _sign_check(
            "reinsurance_dearer_than_insurance",
            q0 - c,
            axes2,
            strict=True,
            detail="q(t, y, 0) > c(t, y)",
        ),
        _sign_check("premium_nonincreasing", -dq, axes3, strict=False, detail="dq/du <= 0"),
        _sign_check("premium_convex", d2q, axes3, strict=False, detail="d2q/du2 >= 0"),
        _sign_check(
            "premium_exceeds_expected_loss",
            c - np.broadcast_to(line.lam(tt, yy), tt.shape) * line.claims.mean,
            axes2,
            strict=True,
            detail="c(t, y) > lam(t, y) E[Z]",
            required=False,
        ),
    ]
    report = ValidationReport(f"premium ({line.premium.kind})", checks)
    if not report.passed:
        logger.warning(f"Premium validation failed: {[c.name for c in report.failures()]}")
    return report


def _moment_check(name: str, dist, tilt: float, order: int, detail: str) -> CheckResult:
    try:
        value = float(tilted_moment(dist, tilt, order))
    except DivergentMomentError as e:
        return CheckResult(name, False, f"{detail}: divergent ({e})", value=math.inf)
    return CheckResult(name, math.isfinite(value), detail, value=value)


def _time_integral(times: np.ndarray, values: np.ndarray) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return float(integrate.trapezoid(values, times))


@log_function_call
def validate_admissibility(
    cfg: ModelConfig, grids: Optional[Dict[int, SamplingGrid]] = None
) -> ValidationReport:
    """Check the sufficient conditions for admissibility of the optimal strategy.

    (a) lam <= delta and q(.,.,0) <= delta on a sampled grid; (b) finite
    E[e^{2 gamma B Z}] and E[Z^2 e^{gamma B Z}]; (c) bounded market price of
    risk with sigma bounded away from zero; (d) finiteness of
    int delta e^{kappa delta} dt. The eta(t) bound on the optimal investment
    and its integrability conditions are reported as well.
    """
    horizon = cfg.horizon
    b_bar = accumulation_bound(cfg)
    gamma = cfg.gamma
    checks: List[CheckResult] = []
    metrics: Dict[str, float] = {"B_bar": b_bar}

    for index in (1, 2):
        line = cfg.line(index)
        grid = (grids or {}).get(index) or default_sampling_grid(cfg, line)
        tt, yy = np.meshgrid(grid.t, grid.y, indexing="ij")
        axes = {"t": grid.t, "y": grid.y}
        delta = np.asarray(line.bound(tt))
        lam = np.broadcast_to(line.lam(tt, yy), tt.shape)
        q0 = np.broadcast_to(line.q(tt, yy, 0.0), tt.shape)
        checks.append(
            _sign_check(
                f"intensity_positive_line{index}", lam, axes, strict=True, detail="lam > 0"
            )
        )
        checks.append(
            _sign_check(
                f"intensity_dominated_line{index}", delta - lam, axes, strict=False,
                detail="lam(t, y) <= delta(t)",
            )
        )
        checks.append(
            _sign_check(
                f"premium_dominated_line{index}", delta - q0, axes, strict=False,
                detail="q(t, y, 0) <= delta(t)",
            )
        )
        checks.append(
            _moment_check(
                f"exp_moment_line{index}", line.claims, 2.0 * gamma * b_bar, 0,
                "E[exp(2 gamma B_bar Z)] < inf",
            )
        )
        checks.append(
            _moment_check(
                f"tilted_second_moment_line{index}", line.claims, gamma * b_bar, 2,
                "E[Z^2 exp(gamma B_bar Z)] < inf",
            )
        )

    times = np.unique(np.concatenate((np.linspace(0.0, horizon, 1001), time_samples(cfg))))
    sigma = np.asarray(cfg.market.sigma(times))
    excess = np.asarray(cfg.market.mu(times)) - np.asarray(cfg.market.r(times))
    sigma_min = float(np.min(sigma))
    metrics["sigma_min"] = sigma_min
    checks.append(
        CheckResult(
            "sigma_bounded_below", sigma_min > 0.0, "sigma(t) >= sigma_min > 0", value=sigma_min
        )
    )
    if sigma_min > 0.0:
        price_of_risk = float(np.max(np.abs(excess) / sigma))
        checks.append(
            CheckResult(
                "market_price_of_risk_bounded",
                math.isfinite(price_of_risk),
                "sup |mu - r| / sigma",
                value=price_of_risk,
            )
        )
        metrics["market_price_of_risk"] = price_of_risk

    # Jump range on sampled claim sizes
    d = cfg.line2.claims.support_bound
    z_top = d if math.isfinite(d) else cfg.line2.claims.quantile(1.0 - CLAIM_TAIL)
    z = np.linspace(0.0, z_top, 101)
    jump = np.multiply.outer(np.asarray(cfg.market.jump.slope(times)), z)
    checks.append(
        CheckResult(
            "jump_below_one",
            bool(np.all(jump < 1.0)),
            "0 <= K(t, z) < 1 on sampled claim sizes"
            + ("" if math.isfinite(d) else " (claims unbounded: sampled to the 1e-12 tail quantile)"),
            value=float(np.max(jump)),
        )
    )

    delta2 = np.asarray(cfg.line2.bound(times))
    if sigma_min > 0.0:
        try:
            shock_moment = float(tilted_moment(cfg.line2.claims, gamma * b_bar, 0))
            kappa = 2.0 / sigma_min**2 * b_bar * shock_moment
        except DivergentMomentError:
            kappa = math.inf
        metrics["kappa"] = kappa
        with np.errstate(over="ignore", invalid="ignore"):
            integrand = delta2 * np.exp(kappa * delta2)
        integral = _time_integral(times, integrand) if math.isfinite(kappa) else math.inf
        checks.append(
            CheckResult(
                "kappa_integrability",
                math.isfinite(integral),
                "int_0^T delta(t) exp(kappa delta(t)) dt < inf",
                value=integral,
            )
        )
        checks.extend(_eta_checks(cfg, times, sigma, excess, delta2, b_bar, metrics))

    report = ValidationReport("admissibility", checks, metrics)
    structured_logger.info(
        "Admissibility validated", passed=report.passed, kappa=metrics.get("kappa")
    )
    return report


def _eta_checks(
    cfg: ModelConfig,
    times: np.ndarray,
    sigma: np.ndarray,
    excess: np.ndarray,
    delta2: np.ndarray,
    b_bar: float,
    metrics: Dict[str, float],
) -> List[CheckResult]:
    """Bound eta(t) >= |w*(t, y)| and the integrability it needs."""
    gb = np.asarray(cfg.gamma * accumulation_to_horizon(cfg, times))
    try:
        shock = np.asarray(tilted_moment(cfg.line2.claims, gb, 0))
    except DivergentMomentError as e:
        return [CheckResult("eta_bound_finite", False, f"divergent: {e}", value=math.inf)]
    eta = np.maximum(np.abs(excess), delta2 * shock) / (gb * sigma**2)
    metrics["eta_max"] = float(np.max(eta))
    with np.errstate(over="ignore", invalid="ignore"):
        first = _time_integral(times, eta * (np.abs(excess) + delta2) + eta**2 * sigma**2)
        second = _time_integral(times, delta2 * np.exp(2.0 * cfg.gamma * eta * b_bar))
    return [
        CheckResult(
            "eta_integrability",
            math.isfinite(first),
            "int eta (|mu - r| + delta) + eta^2 sigma^2 dt < inf",
            value=first,
        ),
        CheckResult(
            "eta_exponential_integrability",
            math.isfinite(second),
            "int delta exp(2 gamma eta B_bar) dt < inf",
            value=second,
        ),
    ]
