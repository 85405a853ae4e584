"""Monte-Carlo simulation of the coupled market and utility estimation."""

from src.sim.estimate import (
    PairedComparison,
    UtilityEstimate,
    compare_strategies,
    estimate_utility,
)
from src.sim.paths import (
    ClaimEvents,
    FactorPaths,
    PathBundle,
    simulate_asset,
    simulate_claim_arrivals,
    simulate_factors,
    simulate_wealth,
)
from src.sim.streams import SimConfig
from src.sim.strategies import (
    ConstantStrategy,
    FunctionStrategy,
    PerturbedStrategy,
    Strategy,
)

__all__ = [
    "ClaimEvents",
    "ConstantStrategy",
    "FactorPaths",
    "FunctionStrategy",
    "PairedComparison",
    "PathBundle",
    "PerturbedStrategy",
    "SimConfig",
    "Strategy",
    "UtilityEstimate",
    "compare_strategies",
    "estimate_utility",
    "simulate_asset",
    "simulate_claim_arrivals",
    "simulate_factors",
    "simulate_wealth",
]
