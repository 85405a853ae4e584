"""Numerical checks of the hypotheses under which the line PDEs are well posed.

Boundedness and Lipschitz continuity in (t, y) of lambda, c and q, and
uniform ellipticity of a(t) and sigma(t), estimated on grids.
"""

import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np
import structlog

from src.log_utils import log_function_call
from src.model.market import InsuranceLine, ModelConfig
from src.model.validation import (
    CheckResult,
    ValidationReport,
    factor_half_width,
    time_samples,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

DEFAULT_KAPPA = 1e-8
# Allowed relative growth of a supremum when the factor domain doubles
GROWTH_TOL = 0.01
# Boundedness is judged at least this far from y0, where bounded intensities have saturated
TAIL_REACH = 50.0
FACTOR_POINTS = 201
RETENTION_SAMPLES = (0.0, 0.5, 1.0)

Surface = Callable[[float, float], float]


def _quantities(line: InsuranceLine) -> List[Tuple[str, Surface]]:
    out: List[Tuple[str, Surface]] = [
        ("lambda", lambda t, y: line.lam(t, y)),
        ("c", lambda t, y: line.c(t, y)),
    ]
    for u in RETENTION_SAMPLES:
        out.append((f"q_u{u:g}", lambda t, y, u=u: line.q(t, y, u)))
    return out


def _surface(func: Surface, times: np.ndarray, ys: np.ndarray) -> np.ndarray:
    evaluate = np.vectorize(lambda t, y: float(func(t, y)), otypes=[float])
    return evaluate(times[:, None], ys[None, :])


def _factor_axis(line: InsuranceLine, width: float) -> np.ndarray:
    return np.linspace(line.y0 - width, line.y0 + width, FACTOR_POINTS)


def _boundedness(
    prefix: str, name: str, func: Surface, times: np.ndarray, line: InsuranceLine, width: float
) -> CheckResult:
    reach = max(10.0 * width, TAIL_REACH)
    with np.errstate(over="ignore"):
        near = float(np.max(np.abs(_surface(func, times, _factor_axis(line, reach)))))
        far = float(np.max(np.abs(_surface(func, times, _factor_axis(line, 2.0 * reach)))))
    ok = far <= near * (1.0 + GROWTH_TOL) + 1e-12
    detail = f"sup |{name}| = {near:.6g} on y0 +- {reach:.3g}, {far:.6g} on y0 +- {2 * reach:.3g}"
    if not ok:
        detail += "; unbounded in y, use a bounded (logistic) intensity preset"
    return CheckResult(f"{prefix}.{name}_bounded", ok, detail, value=far / near if near else 0.0)


def _time_modulus(line: InsuranceLine, name: str, values: np.ndarray, times: np.ndarray) -> float:
    follows_intensity = name == "lambda" or line.premium.is_builtin
    if follows_intensity and line.intensity.kind != "custom":
        # A jump in the base level has no finite modulus.
        if math.isinf(line.intensity.base.lipschitz(float(times[0]), float(times[-1]))):
            return math.inf
    if times.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(values, axis=0)) / np.diff(times)[:, None]))


def _y_modulus(values: np.ndarray, ys: np.ndarray) -> float:
    return float(np.max(np.abs(np.diff(values, axis=1)) / np.diff(ys)[None, :]))


def _lipschitz(
    prefix: str, name: str, func: Surface, times: np.ndarray, line: InsuranceLine, width: float
) -> Tuple[List[CheckResult], Dict[str, float]]:
    ys = _factor_axis(line, width)
    values = _surface(func, times, ys)
    moduli = {
        f"{prefix}.{name}_lipschitz_t": _time_modulus(line, name, values, times),
        f"{prefix}.{name}_lipschitz_y": _y_modulus(values, ys),
    }
    checks = [
        CheckResult(key, math.isfinite(value), f"finite-difference modulus {value:.6g}", value=value)
        for key, value in moduli.items()
    ]
    return checks, moduli


def _ellipticity(name: str, values: np.ndarray, kappa: float) -> CheckResult:
    smallest = float(np.min(np.abs(values)))
    return CheckResult(
        name,
        smallest > kappa,
        f"min = {smallest:.6g}, needs > {kappa:g}",
        value=smallest,
    )


@log_function_call
def check_existence_preconditions(cfg: ModelConfig, kappa: float = DEFAULT_KAPPA) -> ValidationReport:
    """Grid estimates of the well-posedness hypotheses; never raises on failure."""
    times = time_samples(cfg)
    checks: List[CheckResult] = []
    metrics: Dict[str, float] = {}
    for index in (1, 2):
        line = cfg.line(index)
        prefix = f"line{index}"
        width = factor_half_width(cfg, line) or 1.0
        for name, func in _quantities(line):
            checks.append(_boundedness(prefix, name, func, times, line, width))
            lipschitz_checks, moduli = _lipschitz(prefix, name, func, times, line, width)
            checks.extend(lipschitz_checks)
            metrics.update(moduli)
        checks.append(_ellipticity(f"{prefix}.factor_vol_elliptic", np.asarray(line.vol(times)), kappa))
    checks.append(_ellipticity("sigma_elliptic", np.asarray(cfg.market.sigma(times)), kappa))
    metrics["kappa"] = kappa

    report = ValidationReport("existence preconditions", checks, metrics)
    if not report.passed:
        logger.warning(
            "Existence preconditions not met: "
            + ", ".join(c.name for c in report.failures())
        )
    structured_logger.info(
        "Existence preconditions checked", passed=report.passed, failures=len(report.failures())
    )
    return report
