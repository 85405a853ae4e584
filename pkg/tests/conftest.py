"""Test configuration and shared model fixtures."""

import os
import sys
from pathlib import Path
from typing import Optional

import pytest

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.model.claims import ClaimDistribution  # noqa: E402
from src.model.coefficients import TimeCoefficient  # noqa: E402
from src.model.market import (  # noqa: E402
    FinancialMarket,
    InsuranceLine,
    IntensityModel,
    JumpFunction,
    ModelConfig,
    Preferences,
)
from src.model.premiums import PremiumPrinciple  # noqa: E402

PROJECT_DIR = Path(os.path.abspath(os.path.dirname(__file__)))


def build_line(
    lam: float = 2.0,
    claims: Optional[ClaimDistribution] = None,
    premium: Optional[PremiumPrinciple] = None,
    intensity: Optional[IntensityModel] = None,
    vol: float = 0.3,
    drift: float = 0.0,
    y0: float = 0.0,
    bound: Optional[float] = None,
) -> InsuranceLine:
    claims = claims or ClaimDistribution.truncated_exponential(1.0, 20.0)
    premium = premium or PremiumPrinciple.expected_value(0.2, 0.3)
    intensity = intensity or IntensityModel("constant", base=TimeCoefficient.constant(lam))
    return InsuranceLine(
        intensity=intensity,
        claims=claims,
        premium=premium,
        drift=TimeCoefficient.constant(drift),
        vol=TimeCoefficient.constant(vol),
        y0=y0,
        bound=TimeCoefficient.constant(bound if bound is not None else 3.0 * lam),
    )


def build_config(
    line1: Optional[InsuranceLine] = None,
    line2: Optional[InsuranceLine] = None,
    k: float = 0.02,
    r: float = 0.02,
    mu: float = 0.06,
    sigma: float = 0.25,
    gamma: float = 0.5,
    horizon: float = 1.0,
    initial_wealth: float = 0.0,
) -> ModelConfig:
    """A small market; both lines default to constant intensities (lam 2)."""
    jump = JumpFunction.multiplicative(k) if k > 0.0 else JumpFunction.none()
    market = FinancialMarket(
        r=TimeCoefficient.constant(r),
        mu=TimeCoefficient.constant(mu),
        sigma=TimeCoefficient.constant(sigma),
        jump=jump,
    )
    return ModelConfig(
        line1=line1 or build_line(),
        line2=line2 or build_line(),
        market=market,
        preferences=Preferences(gamma=gamma, horizon=horizon, initial_wealth=initial_wealth),
    )


@pytest.fixture
def project_dir():
    """Fixture to provide the project directory for tests."""
    return PROJECT_DIR


@pytest.fixture
def make_line():
    return build_line


@pytest.fixture
def make_config():
    return build_config


@pytest.fixture
def constant_config():
    """Factor-independent lines; the PDEs reduce to ODEs in t."""
    return build_config()


@pytest.fixture
def logistic_config():
    """Factor-dependent, bounded intensities on both lines."""

    def logistic(base: float, low: float, high: float) -> IntensityModel:
        return IntensityModel(
            "logistic", base=TimeCoefficient.constant(base), beta=1.0, low=low, high=high
        )

    return build_config(
        line1=build_line(intensity=logistic(2.0, 1.0, 2.0), vol=0.5, bound=8.0),
        line2=build_line(intensity=logistic(3.0, 0.5, 1.0), vol=0.5, bound=6.0),
    )


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"
