"""Tests for the expected exponential loss estimates."""

import math

import numpy as np
import pytest

from src.sim.estimate import compare_strategies, estimate_utility, exponential_losses
from src.sim.paths import simulate_wealth
from src.sim.streams import SimConfig
from src.sim.strategies import ConstantStrategy, PerturbedStrategy

FULL_REINSURANCE = ConstantStrategy(u1_value=0.0, u2_value=0.0, w_value=0.0)


class TestEstimateUtility:
    def test_deterministic_wealth(self, constant_config):
        cfg = constant_config
        sim = SimConfig(n_paths=32, n_steps=20)
        bundle = simulate_wealth(cfg, FULL_REINSURANCE, sim)
        estimate = estimate_utility(cfg, FULL_REINSURANCE, sim, bundle=bundle)
        assert estimate.mean == pytest.approx(math.exp(-cfg.gamma * bundle.x_T[0]))
        assert estimate.stderr < 1e-12
        assert estimate.expected_utility == pytest.approx(1.0 - estimate.mean)
        assert estimate.n_excluded == estimate.n_aborted == 0

    def test_reuses_given_bundle(self, constant_config):
        sim = SimConfig(n_paths=64, n_steps=10, seed=1)
        strategy = ConstantStrategy(w_value=1.0)
        bundle = simulate_wealth(constant_config, strategy, sim)
        fresh = estimate_utility(constant_config, strategy, sim)
        reused = estimate_utility(constant_config, strategy, sim, bundle=bundle)
        assert fresh == reused
        assert fresh.to_dict()["n_paths"] == 64

    def test_overflowing_paths_are_excluded(self, constant_config):
        strategy = ConstantStrategy(w_value=1e5)
        sim = SimConfig(n_paths=200, n_steps=10, seed=5)
        bundle = simulate_wealth(constant_config, strategy, sim)
        losses = exponential_losses(constant_config, bundle)
        estimate = estimate_utility(constant_config, strategy, sim, bundle=bundle)
        assert estimate.n_excluded == int(np.isnan(losses).sum()) > 0
        assert math.isfinite(estimate.mean)

    def test_antithetic_estimate(self, constant_config):
        sim = SimConfig(n_paths=200, n_steps=10, seed=5, antithetic=True)
        estimate = estimate_utility(constant_config, ConstantStrategy(w_value=1.0), sim)
        assert estimate.n_paths == 200
        assert estimate.stderr > 0.0


class TestCompareStrategies:
    def test_identical_strategies(self, constant_config):
        sim = SimConfig(n_paths=64, n_steps=10, seed=7)
        base = ConstantStrategy(u1_value=0.5, u2_value=0.5, w_value=1.0)
        (result,) = compare_strategies(constant_config, base, {"same": base}, sim)
        assert result.name == "same"
        assert result.difference == 0.0
        assert result.stderr == 0.0
        assert result.n_used == 64

    def test_differences_are_paired(self, constant_config):
        sim = SimConfig(n_paths=128, n_steps=10, seed=7)
        base = ConstantStrategy(w_value=1.0)
        results = compare_strategies(
            constant_config, base, {"bigger_w": PerturbedStrategy(base, w_scale=1.5)}, sim
        )
        result = results[0]
        assert result.difference == pytest.approx(result.other_mean - result.base_mean)
        assert result.to_dict()["name"] == "bigger_w"
