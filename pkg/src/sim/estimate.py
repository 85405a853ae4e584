"""Monte-Carlo estimates of the expected exponential loss E[exp(-gamma X_T)]."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import structlog

from src.log_utils import log_function_call
from src.model.market import ModelConfig
from src.sim.paths import PathBundle, simulate_wealth
from src.sim.streams import SimConfig
from src.sim.strategies import Strategy

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# exp overflows double precision above this exponent
LOG_OVERFLOW = 709.0


@dataclass(frozen=True)
class UtilityEstimate:
    mean: float
    stderr: float
    n_paths: int
    n_excluded: int = 0
    n_aborted: int = 0

    @property
    def expected_utility(self) -> float:
        """E[1 - exp(-gamma X_T)]."""
        return 1.0 - self.mean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "expected_utility": self.expected_utility,
            "n_paths": self.n_paths,
            "n_excluded": self.n_excluded,
            "n_aborted": self.n_aborted,
        }


def _sample_stats(values: np.ndarray, pair_id: np.ndarray, antithetic: bool):
    """Mean and standard error, averaging antithetic partners first."""
    if values.size == 0:
        return math.nan, math.nan
    # Antithetic partners share a pair id and count as one draw
    if antithetic:
        sums = np.bincount(pair_id, weights=values)
        counts = np.bincount(pair_id)
        values = sums[counts > 0] / counts[counts > 0]
    if values.size < 2:
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(values.size))


def exponential_losses(cfg: ModelConfig, bundle: PathBundle) -> np.ndarray:
    """exp(-gamma X_T) per path; NaN for aborted or overflowing paths."""
    exponent = -cfg.gamma * bundle.x_T
    # Aborted paths carry X_T = NaN and are dropped with the overflowing ones
    overflow = exponent > LOG_OVERFLOW
    if np.any(overflow):
        worst = float(np.nanmax(exponent))
        logger.warning(
            f"{int(overflow.sum())} path(s) with -gamma X_T up to {worst:.6g} overflow; "
            "excluded from the estimate (the strategy looks inadmissible)"
        )
    return np.where(overflow | ~np.isfinite(exponent), np.nan, np.exp(np.minimum(exponent, LOG_OVERFLOW)))


@log_function_call
def estimate_utility(
    cfg: ModelConfig, strategy: Strategy, sim: SimConfig, bundle: Optional[PathBundle] = None
) -> UtilityEstimate:
    """Sample mean and standard error of exp(-gamma X_T) under ``strategy``.

    Paths whose loss overflows are excluded and counted in ``n_excluded``;
    paths aborted by the intensity bound are counted in ``n_aborted``.
    """
    bundle = bundle or simulate_wealth(cfg, strategy, sim)
    losses = exponential_losses(cfg, bundle)
    ok = np.isfinite(losses)
    mean, stderr = _sample_stats(losses[ok], bundle.pair_id[ok], sim.antithetic)
    n_aborted = int(bundle.aborted.sum())
    estimate = UtilityEstimate(
        mean=mean,
        stderr=stderr,
        n_paths=bundle.n_paths,
        n_excluded=int((~ok).sum()) - n_aborted,
        n_aborted=n_aborted,
    )
    structured_logger.info("Utility estimated", **estimate.to_dict())
    return estimate


@dataclass(frozen=True)
class PairedComparison:
    """other - base differences of exp(-gamma X_T) on common random numbers."""

    name: str
    base_mean: float
    other_mean: float
    difference: float
    stderr: float
    n_used: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "base_mean": self.base_mean,
            "other_mean": self.other_mean,
            "difference": self.difference,
            "stderr": self.stderr,
            "n_used": self.n_used,
        }


@log_function_call
def compare_strategies(
    cfg: ModelConfig, base: Strategy, others: Mapping[str, Strategy], sim: SimConfig
) -> List[PairedComparison]:
    """Paired comparison of each strategy in ``others`` against ``base``.

    Every strategy is simulated with the same ``sim``, so the market noise is
    shared and only the wealth differs.
    """
    base_losses = exponential_losses(cfg, simulate_wealth(cfg, base, sim))
    results = []
    for name, strategy in others.items():
        bundle = simulate_wealth(cfg, strategy, sim)
        losses = exponential_losses(cfg, bundle)
        # Only paths usable under both strategies enter the paired difference
        ok = np.isfinite(base_losses) & np.isfinite(losses)
        difference, stderr = _sample_stats(
            losses[ok] - base_losses[ok], bundle.pair_id[ok], sim.antithetic
        )
        results.append(
            PairedComparison(
                name=name,
                base_mean=float(np.mean(base_losses[ok])),
                other_mean=float(np.mean(losses[ok])),
                difference=difference,
                stderr=stderr,
                n_used=int(ok.sum()),
            )
        )
        structured_logger.info("Paired comparison", **results[-1].to_dict())
    return results
