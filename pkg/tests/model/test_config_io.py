"""Tests for JSON model configurations."""

import copy
import json

import pytest

from src.errors import ModelError
from src.model.config_io import (
    config_from_dict,
    config_hash,
    config_to_dict,
    dump_config,
    load_config,
)
from src.presets import preset_config

LINE = {
    "intensity": {"kind": "logistic", "base": 5.0, "beta": 1.0, "low": 1.0, "high": 2.0},
    "claims": {"kind": "truncated_exponential", "rate": 1.0, "cap": 20.0},
    "premium": {"kind": "expected_value", "theta": 0.2, "theta_r": 0.3},
    "vol": 0.5,
    "bound": 15.0,
}

DOCUMENT = {
    "horizon": 1.0,
    "risk_aversion": 0.5,
    "market": {
        "r": 0.02,
        "mu": {"kind": "piecewise", "breakpoints": [0.5], "values": [0.06, 0.05]},
        "sigma": 0.25,
        "jump": {"kind": "multiplicative", "k": 0.02},
    },
    "lines": [copy.deepcopy(LINE), copy.deepcopy(LINE)],
}


class TestConfigFromDict:
    def test_full_document(self):
        cfg = config_from_dict(DOCUMENT)
        assert cfg.horizon == 1.0
        assert cfg.gamma == 0.5
        assert cfg.market.mu(0.75) == 0.05
        assert cfg.market.jump.slope(0.0) == 0.02
        assert cfg.line1.intensity.kind == "logistic"
        assert cfg.line2.claims.cap == 20.0

    def test_defaults(self):
        cfg = config_from_dict(DOCUMENT)
        assert cfg.line1.y0 == 0.0
        assert cfg.line1.drift(0.3) == 0.0
        assert cfg.market.p0 == 1.0
        assert cfg.preferences.initial_wealth == 0.0

    def test_missing_key_names_path(self):
        data = copy.deepcopy(DOCUMENT)
        del data["lines"][1]["claims"]
        with pytest.raises(ModelError, match=r"config.lines\[1\]: missing key 'claims'"):
            config_from_dict(data)

    def test_two_lines_required(self):
        data = copy.deepcopy(DOCUMENT)
        data["lines"] = [LINE]
        with pytest.raises(ModelError, match="exactly two"):
            config_from_dict(data)

    def test_wrong_type(self):
        data = copy.deepcopy(DOCUMENT)
        data["risk_aversion"] = "high"
        with pytest.raises(ModelError, match="config.risk_aversion"):
            config_from_dict(data)

    def test_custom_principle_rejected(self):
        data = copy.deepcopy(DOCUMENT)
        data["lines"][0]["premium"] = {"kind": "custom"}
        with pytest.raises(ModelError, match="Python-only"):
            config_from_dict(data)

    def test_unknown_jump(self):
        data = copy.deepcopy(DOCUMENT)
        data["market"]["jump"] = {"kind": "additive"}
        with pytest.raises(ModelError, match="jump.kind"):
            config_from_dict(data)


class TestSerialization:
    def test_document_survives_dump(self):
        cfg = config_from_dict(DOCUMENT)
        again = config_from_dict(json.loads(dump_config(cfg)))
        assert config_hash(again) == config_hash(cfg)

    def test_hash_sees_parameter_changes(self):
        data = copy.deepcopy(DOCUMENT)
        data["market"]["jump"]["k"] = 0.01
        assert config_hash(config_from_dict(data)) != config_hash(config_from_dict(DOCUMENT))

    def test_presets_serialize(self):
        data = config_to_dict(preset_config("evp-comparison"))
        assert data["lines"][0]["intensity"]["kind"] == "logistic"
        assert data["market"]["jump"] == {"kind": "multiplicative", "k": 0.02}


class TestLoadConfig:
    def test_load(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(DOCUMENT), encoding="utf-8")
        assert config_hash(load_config(path)) == config_hash(config_from_dict(DOCUMENT))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ not json", encoding="utf-8")
        with pytest.raises(ModelError, match="invalid JSON"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json")
