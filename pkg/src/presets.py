"""Named model configurations.

fig1 and fig2 carry the parameters of the two reference figures; the
remaining tags are bounded-intensity configurations for the end-to-end
subcommands.
"""

from typing import Callable, Dict

from src.errors import ModelError
from src.model.claims import ClaimDistribution
from src.model.coefficients import TimeCoefficient
from src.model.market import (
    FinancialMarket,
    InsuranceLine,
    IntensityModel,
    JumpFunction,
    ModelConfig,
    Preferences,
)
from src.model.premiums import PremiumPrinciple

# Point at which the reference figures are drawn
FIGURE_TIME = 0.0
FIGURE_FACTOR = -0.2
FIGURE_RETENTIONS = (0.0, 0.5, 1.0)
# Margin of the intensity bound over sup lam and sup q(., ., 0)
BOUND_MARGIN = 1.1


def _constant(value: float) -> TimeCoefficient:
    return TimeCoefficient.constant(value)


def _figure_market(k: float) -> FinancialMarket:
    return FinancialMarket(
        r=_constant(0.02),
        mu=_constant(0.05),
        sigma=_constant(0.1),
        jump=JumpFunction.multiplicative(k),
    )


def _figure_config(claims: ClaimDistribution, k: float) -> ModelConfig:
    premium = PremiumPrinciple.expected_value(0.2, 0.3)
    line1 = InsuranceLine(
        intensity=IntensityModel("constant", base=_constant(5.0)),
        claims=ClaimDistribution.exponential(1.0),
        premium=premium,
        drift=_constant(0.0),
        vol=_constant(0.3),
        y0=0.0,
        bound=_constant(10.0),
    )
    # lam(t, y) = 10 exp(-y), so lam(0, -0.2) = 10 e^{0.2}
    line2 = InsuranceLine(
        intensity=IntensityModel("exponential", base=_constant(10.0), beta=-1.0),
        claims=claims,
        premium=premium,
        drift=_constant(0.0),
        vol=_constant(0.3),
        y0=FIGURE_FACTOR,
        bound=_constant(100.0),
    )
    return ModelConfig(line1, line2, _figure_market(k), Preferences(gamma=0.5, horizon=1.0))


def fig1() -> ModelConfig:
    return _figure_config(ClaimDistribution.exponential(1.0), k=0.01)


def fig2() -> ModelConfig:
    return _figure_config(ClaimDistribution.truncated_exponential(1.0, 100.0), k=0.005)


def _bounded_line(
    base: float, low: float, high: float, premium: PremiumPrinciple, claims: ClaimDistribution
) -> InsuranceLine:
    intensity = IntensityModel("logistic", base=_constant(base), beta=1.0, low=low, high=high)
    lam_sup = base * high
    q_sup = float(premium.reinsurance_rate(0.0, 0.0, 0.0, lam_sup, claims.mean, claims.second_moment))
    return InsuranceLine(
        intensity=intensity,
        claims=claims,
        premium=premium,
        drift=_constant(0.0),
        vol=_constant(0.5),
        y0=0.0,
        bound=_constant(BOUND_MARGIN * max(lam_sup, q_sup)),
    )


def _bounded_config(premium: PremiumPrinciple) -> ModelConfig:
    claims = ClaimDistribution.truncated_exponential(1.0, 20.0)
    market = FinancialMarket(
        r=_constant(0.02),
        mu=_constant(0.06),
        sigma=_constant(0.25),
        jump=JumpFunction.multiplicative(0.02),
    )
    return ModelConfig(
        line1=_bounded_line(5.0, 1.0, 2.0, premium, claims),
        line2=_bounded_line(3.0, 0.0, 1.0, premium, claims),
        market=market,
        preferences=Preferences(gamma=0.5, horizon=1.0),
    )


def evp_comparison() -> ModelConfig:
    return _bounded_config(PremiumPrinciple.expected_value(0.2, 0.3))


def no_shock() -> ModelConfig:
    return evp_comparison().without_shock()


def variance() -> ModelConfig:
    return _bounded_config(PremiumPrinciple.variance(0.2, 0.3))


PRESETS: Dict[str, Callable[[], ModelConfig]] = {
    "fig1": fig1,
    "fig2": fig2,
    "evp-comparison": evp_comparison,
    "no-shock": no_shock,
    "variance": variance,
}


def preset_config(tag: str) -> ModelConfig:
    if tag not in PRESETS:
        raise ModelError(f"Unknown preset '{tag}', expected one of {sorted(PRESETS)}")
    return PRESETS[tag]()
