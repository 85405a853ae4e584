"""Model coefficients, claim laws, premium principles and validators."""

from src.model.claims import ClaimDistribution, tilted_moment
from src.model.coefficients import TimeCoefficient
from src.model.market import (
    FinancialMarket,
    InsuranceLine,
    IntensityModel,
    JumpFunction,
    ModelConfig,
    Preferences,
    accumulation_bound,
    accumulation_factor,
    risk_scale,
)
from src.model.premiums import PremiumPrinciple
from src.model.validation import (
    SamplingGrid,
    ValidationReport,
    default_sampling_grid,
    validate_admissibility,
    validate_premium,
)

__all__ = [
    "ClaimDistribution",
    "FinancialMarket",
    "InsuranceLine",
    "IntensityModel",
    "JumpFunction",
    "ModelConfig",
    "Preferences",
    "PremiumPrinciple",
    "SamplingGrid",
    "TimeCoefficient",
    "ValidationReport",
    "accumulation_bound",
    "accumulation_factor",
    "default_sampling_grid",
    "risk_scale",
    "tilted_moment",
    "validate_admissibility",
    "validate_premium",
]
