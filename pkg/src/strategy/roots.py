"""Scalar root finding for increasing first-order-condition functions.

All functions here solve f(x) = 0 for f increasing in x. Evaluations that
diverge (infinite tilted moments) are treated as +inf, which is consistent
with the functions being increasing.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

from src.errors import BracketError, ConvergenceError, DivergentMomentError

logger = logging.getLogger(__name__)

FTOL = 1e-10
MAX_ITER = 200
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


def _safe(func: Callable[[float], float], x: float) -> float:
    try:
        value = func(x)
    except DivergentMomentError:
        return math.inf
    return value if not math.isnan(value) else math.inf


def bracket_increasing(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    max_doublings: int = MAX_DOUBLINGS,
) -> Tuple[float, float]:
    """Widen [lo, hi] geometrically until func(lo) <= 0 <= func(hi).

    Raises:
        BracketError: If no sign change appears within ``max_doublings``.
    """
    width = max(hi - lo, 1e-8)
    f_lo, f_hi = _safe(func, lo), _safe(func, hi)
    for _ in range(max_doublings):
        if f_lo <= 0.0 <= f_hi:
            return lo, hi
        if f_lo > 0.0:
            hi, f_hi = lo, f_lo
            lo -= width
            f_lo = _safe(func, lo)
        else:
            lo, f_lo = hi, f_hi
            hi += width
            f_hi = _safe(func, hi)
        width *= 2.0
    if f_lo <= 0.0 <= f_hi:
        return lo, hi
    logger.error(f"No sign change after {max_doublings} doublings: f({lo})={f_lo}, f({hi})={f_hi}")
    raise BracketError(
        f"Root bracket not found after {max_doublings} doublings "
        f"(f({lo:.6g})={f_lo:.6g}, f({hi:.6g})={f_hi:.6g})"
    )


def safeguarded_newton(
    func: Callable[[float], float],
    dfunc: Callable[[float], float],
    lo: float,
    hi: float,
    ftol: float = FTOL,
    max_iter: int = MAX_ITER,
) -> RootResult:
    """Newton iteration kept inside a shrinking bracket, bisecting when needed.

    Requires func(lo) <= 0 <= func(hi). Converged when |func| <= ftol.

    Raises:
        BracketError: If the end points do not bracket a root.
        ConvergenceError: If ``max_iter`` iterations do not reach ``ftol``.
    """
    f_lo, f_hi = _safe(func, lo), _safe(func, hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise BracketError(f"[{lo}, {hi}] does not bracket a root: f={f_lo}, {f_hi}")
    if abs(f_lo) <= ftol:
        return RootResult(lo, abs(f_lo), 0)
    if abs(f_hi) <= ftol:
        return RootResult(hi, abs(f_hi), 0)

    x = 0.5 * (lo + hi)
    step_old = hi - lo
    f = _safe(func, x)
    for iteration in range(1, max_iter + 1):
        if abs(f) <= ftol:
            return RootResult(x, abs(f), iteration)
        if f < 0.0:
            lo = x
        else:
            hi = x
        df = dfunc(x) if math.isfinite(f) else math.nan
        newton_ok = (
            math.isfinite(df)
            and df > 0.0
            and lo < x - f / df < hi
            and abs(2.0 * f) <= abs(step_old * df)
        )
        if newton_ok:
            step_old = f / df
            x_new = x - step_old
        else:
            step_old = 0.5 * (hi - lo)
            x_new = lo + step_old
        if x_new == x or hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi), 1.0)):
            # Bracket at float resolution.
            f_new = _safe(func, x_new)
            if abs(f_new) <= ftol:
                return RootResult(x_new, abs(f_new), iteration)
            logger.error(f"Bracket collapsed at x={x_new} with residual {f_new}")
            raise ConvergenceError(f"Bracket collapsed at {x_new:.17g} with residual {f_new:.3g}")
        x = x_new
        f = _safe(func, x)
    logger.error(f"No convergence after {max_iter} iterations, last residual {f}")
    raise ConvergenceError(f"No convergence after {max_iter} iterations (residual {f:.3g})")


def bisect_increasing(
    func: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-13, max_iter: int = 400
) -> float:
    """Plain bisection, used as an independent oracle."""
    f_lo = _safe(func, lo)
    f_hi = _safe(func, hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise BracketError(f"[{lo}, {hi}] does not bracket a root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        if _safe(func, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
