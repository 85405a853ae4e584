"""JSON (de)serialization of ModelConfig.

Times are in years and rates per annum. The schema is documented in the
README; every structural error is reported with the offending key path.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict

from src.errors import ModelError
from src.file_tools.file_operations import read_file
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

logger = logging.getLogger(__name__)


def _require(mapping: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(mapping, dict):
        raise ModelError(f"{path}: expected an object")
    if key not in mapping:
        logger.error(f"Missing configuration key {path}.{key}")
        raise ModelError(f"{path}: missing key '{key}'")
    return mapping[key]


def _number(value: Any, path: str) -> float:
    # bool is an int subclass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _coefficient(mapping: Dict[str, Any], key: str, path: str, default=None) -> TimeCoefficient:
    if key not in mapping and default is not None:
        return TimeCoefficient.constant(default)
    return TimeCoefficient.from_json_value(_require(mapping, key, path), f"{path}.{key}")


def _claims_from_dict(data: Dict[str, Any], path: str) -> ClaimDistribution:
    kind = _require(data, "kind", path)
    if kind == "exponential":
        return ClaimDistribution.exponential(_number(_require(data, "rate", path), f"{path}.rate"))
    if kind == "truncated_exponential":
        return ClaimDistribution.truncated_exponential(
            _number(_require(data, "rate", path), f"{path}.rate"),
            _number(_require(data, "cap", path), f"{path}.cap"),
        )
    if kind == "discrete":
        atoms = _require(data, "atoms", path)
        weights = _require(data, "weights", path)
        return ClaimDistribution.discrete(
            [_number(a, f"{path}.atoms") for a in atoms],
            [_number(w, f"{path}.weights") for w in weights],
        )
    raise ModelError(f"{path}.kind: unknown claim distribution '{kind}'")


def _premium_from_dict(data: Dict[str, Any], path: str) -> PremiumPrinciple:
    kind = _require(data, "kind", path)
    if kind not in ("expected_value", "variance"):
        raise ModelError(f"{path}.kind: '{kind}' (custom principles are Python-only)")
    return PremiumPrinciple(
        kind,
        _number(_require(data, "theta", path), f"{path}.theta"),
        _number(_require(data, "theta_r", path), f"{path}.theta_r"),
    )


def _intensity_from_dict(data: Dict[str, Any], path: str) -> IntensityModel:
    kind = _require(data, "kind", path)
    if kind not in ("constant", "exponential", "logistic"):
        raise ModelError(f"{path}.kind: '{kind}' (custom intensities are Python-only)")
    return IntensityModel(
        kind,
        base=_coefficient(data, "base", path),
        beta=_number(data.get("beta", 1.0), f"{path}.beta"),
        low=_number(data.get("low", 1.0), f"{path}.low"),
        high=_number(data.get("high", 2.0), f"{path}.high"),
    )


def _line_from_dict(data: Dict[str, Any], path: str) -> InsuranceLine:
    return InsuranceLine(
        intensity=_intensity_from_dict(_require(data, "intensity", path), f"{path}.intensity"),
        claims=_claims_from_dict(_require(data, "claims", path), f"{path}.claims"),
        premium=_premium_from_dict(_require(data, "premium", path), f"{path}.premium"),
        drift=_coefficient(data, "drift", path, default=0.0),
        vol=_coefficient(data, "vol", path),
        y0=_number(data.get("y0", 0.0), f"{path}.y0"),
        bound=_coefficient(data, "bound", path),
    )


def config_from_dict(data: Dict[str, Any]) -> ModelConfig:
    """Build a ModelConfig from its JSON document.

    Raises:
        ModelError: On any missing key, wrong type or invalid value.
    """
    market_data = _require(data, "market", "config")
    jump_data = market_data.get("jump", {"kind": "none"})
    jump_kind = _require(jump_data, "kind", "config.market.jump")
    if jump_kind == "none":
        jump = JumpFunction.none()
    elif jump_kind == "multiplicative":
        jump = JumpFunction.multiplicative(
            _coefficient(jump_data, "k", "config.market.jump")
        )
    else:
        raise ModelError(f"config.market.jump.kind: unknown kind '{jump_kind}'")
    market = FinancialMarket(
        r=_coefficient(market_data, "r", "config.market"),
        mu=_coefficient(market_data, "mu", "config.market"),
        sigma=_coefficient(market_data, "sigma", "config.market"),
        jump=jump,
        p0=_number(market_data.get("p0", 1.0), "config.market.p0"),
    )
    lines = _require(data, "lines", "config")
    if not isinstance(lines, list) or len(lines) != 2:
        raise ModelError("config.lines: expected a list of exactly two insurance lines")
    preferences = Preferences(
        gamma=_number(_require(data, "risk_aversion", "config"), "config.risk_aversion"),
        horizon=_number(_require(data, "horizon", "config"), "config.horizon"),
        initial_wealth=_number(data.get("initial_wealth", 0.0), "config.initial_wealth"),
    )
    return ModelConfig(
        line1=_line_from_dict(lines[0], "config.lines[0]"),
        line2=_line_from_dict(lines[1], "config.lines[1]"),
        market=market,
        preferences=preferences,
    )


def _line_to_dict(line: InsuranceLine) -> Dict[str, Any]:
    return {
        "intensity": line.intensity.to_dict(),
        "claims": line.claims.to_dict(),
        "premium": line.premium.to_dict(),
        "drift": line.drift.to_json_value(),
        "vol": line.vol.to_json_value(),
        "y0": line.y0,
        "bound": line.bound.to_json_value(),
    }


def config_to_dict(cfg: ModelConfig) -> Dict[str, Any]:
    """Inverse of config_from_dict for configurations without custom callables."""
    return {
        "horizon": cfg.preferences.horizon,
        "risk_aversion": cfg.preferences.gamma,
        "initial_wealth": cfg.preferences.initial_wealth,
        "market": {
            "r": cfg.market.r.to_json_value(),
            "mu": cfg.market.mu.to_json_value(),
            "sigma": cfg.market.sigma.to_json_value(),
            "p0": cfg.market.p0,
            "jump": cfg.market.jump.to_dict(),
        },
        "lines": [_line_to_dict(cfg.line1), _line_to_dict(cfg.line2)],
    }


def dump_config(cfg: ModelConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def config_hash(cfg: ModelConfig) -> str:
    """sha256 of the canonical JSON form."""
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: Path) -> ModelConfig:
    """Read and validate a ModelConfig JSON file."""
    content = read_file(Path(path).absolute())
    try:
        data = json.loads(content)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {path}: {e}")
        raise ModelError(f"{path}: invalid JSON ({e})") from e
    logger.info(f"Loaded model configuration from {path}")
    return config_from_dict(data)
