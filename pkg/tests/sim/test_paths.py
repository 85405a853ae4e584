"""Tests for the path simulation."""

import math

import numpy as np
import pytest

from src.errors import DominanceError, PreconditionError
from src.sim.paths import (
    SUMMARY_COLUMNS,
    simulate_asset,
    simulate_claim_arrivals,
    simulate_factors,
    simulate_wealth,
)
from src.sim.streams import SimConfig
from src.sim.strategies import ConstantStrategy, FunctionStrategy

NO_REINSURANCE = ConstantStrategy()
FULL_REINSURANCE = ConstantStrategy(u1_value=0.0, u2_value=0.0, w_value=0.0)


class TestReproducibility:
    def test_same_seed_same_bundle(self, constant_config):
        sim = SimConfig(n_paths=64, n_steps=10, seed=4)
        strategy = ConstantStrategy(u1_value=0.5, u2_value=0.7, w_value=1.0)
        first = simulate_wealth(constant_config, strategy, sim)
        second = simulate_wealth(constant_config, strategy, sim)
        assert np.array_equal(first.x_T, second.x_T)
        assert np.array_equal(first.p_T, second.p_T)

    def test_workers_do_not_change_results(self, logistic_config):
        serial = SimConfig(n_paths=256, n_steps=10, seed=9, batch_size=64)
        threaded = SimConfig(n_paths=256, n_steps=10, seed=9, batch_size=64, workers=2)
        strategy = ConstantStrategy(w_value=0.5)
        first = simulate_wealth(logistic_config, strategy, serial)
        second = simulate_wealth(logistic_config, strategy, threaded)
        assert np.array_equal(first.x_T, second.x_T)
        assert np.array_equal(first.n2, second.n2)

    def test_market_noise_ignores_strategy(self, constant_config):
        sim = SimConfig(n_paths=64, n_steps=10, seed=2)
        first = simulate_wealth(constant_config, NO_REINSURANCE, sim)
        second = simulate_wealth(constant_config, FULL_REINSURANCE, sim)
        assert np.array_equal(first.n1, second.n1)
        assert np.array_equal(first.p_T, second.p_T)
        assert not np.array_equal(first.x_T, second.x_T)


class TestFactorsAndClaims:
    def test_deterministic_factor(self, make_config, make_line):
        cfg = make_config(line1=make_line(vol=0.0, drift=0.5, y0=1.0))
        factors = simulate_factors(cfg, SimConfig(n_paths=16, n_steps=10))
        assert factors.y1.shape == (11, 16)
        assert factors.y1[-1] == pytest.approx(np.full(16, 1.5))
        assert np.std(factors.y2[-1]) > 0.0

    def test_poisson_counts(self, make_config, make_line):
        cfg = make_config(line1=make_line(lam=5.0))
        events = simulate_claim_arrivals(cfg, 1, SimConfig(n_paths=4000, n_steps=20, seed=1))
        counts = events.counts(4000)
        assert np.mean(counts) == pytest.approx(5.0, abs=0.2)
        assert np.all(np.diff(events.path_index) >= 0)
        assert events.intensity_integral == pytest.approx(np.full(4000, 5.0))

    def test_claims_replay_in_wealth_run(self, constant_config):
        sim = SimConfig(n_paths=32, n_steps=10, seed=6, keep_paths=True)
        events = simulate_claim_arrivals(constant_config, 2, sim)
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, sim)
        assert np.array_equal(events.times, bundle.events[2].times)
        assert np.array_equal(events.sizes, bundle.events[2].sizes)
        assert events.for_path(0)["times"].size == bundle.n2[0]


class TestAsset:
    def test_jumps_follow_second_line_claims(self, constant_config):
        sim = SimConfig(n_paths=64, n_steps=10, seed=3, keep_paths=True)
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, sim)
        events = bundle.events[2]
        expected = np.bincount(
            events.path_index, weights=np.log(1.0 - 0.02 * events.sizes), minlength=64
        )
        assert bundle.jump_log_return == pytest.approx(expected)
        assert np.all(bundle.jump_log_return <= 0.0)

    def test_asset_matches_wealth_run(self, constant_config):
        sim = SimConfig(n_paths=32, n_steps=10, seed=8)
        asset = simulate_asset(constant_config, sim)
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, sim)
        assert asset.prices.shape == (11, 32)
        assert np.array_equal(asset.prices[-1], bundle.p_T)


class TestWealth:
    def test_full_reinsurance_is_deterministic(self, constant_config):
        cfg = constant_config
        bundle = simulate_wealth(cfg, FULL_REINSURANCE, SimConfig(n_paths=16, n_steps=20))
        mean_claim = cfg.line1.claims.mean
        per_line = (0.2 - 0.3) * 2.0 * mean_claim * (math.exp(0.02) - 1.0) / 0.02
        assert bundle.x_T == pytest.approx(np.full(16, 2.0 * per_line), rel=1e-9)

    def test_budget_without_interest(self, make_config):
        cfg = make_config(r=0.0)
        bundle = simulate_wealth(cfg, NO_REINSURANCE, SimConfig(n_paths=16, n_steps=20, seed=2))
        premia = cfg.line1.c(0.0, 0.0) + cfg.line2.c(0.0, 0.0)
        assert bundle.x_T == pytest.approx(premia - bundle.claims1 - bundle.claims2, abs=1e-9)

    def test_initial_wealth_grows_at_riskless_rate(self, make_config):
        cfg = make_config(initial_wealth=3.0)
        bundle = simulate_wealth(cfg, FULL_REINSURANCE, SimConfig(n_paths=4, n_steps=20))
        base = simulate_wealth(make_config(), FULL_REINSURANCE, SimConfig(n_paths=4, n_steps=20))
        assert bundle.x_T - base.x_T == pytest.approx(np.full(4, 3.0 * math.exp(0.02)))

    def test_kept_paths(self, constant_config):
        sim = SimConfig(n_paths=8, n_steps=10, keep_paths=True)
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, sim)
        assert bundle.paths["x"].shape == (11, 8)
        assert bundle.paths["x"][-1] == pytest.approx(bundle.x_T)
        assert len(bundle.summary_rows()[0]) == len(SUMMARY_COLUMNS)

    def test_dominance_violation_everywhere(self, make_config, make_line):
        cfg = make_config(line1=make_line(lam=50.0, bound=30.0))
        with pytest.raises(DominanceError):
            simulate_wealth(cfg, NO_REINSURANCE, SimConfig(n_paths=8, n_steps=10))

    def test_non_finite_strategy(self, constant_config):
        strategy = FunctionStrategy(
            u1_func=lambda t, y: 1.0 + 0.0 * y,
            u2_func=lambda t, y: 1.0 + 0.0 * y,
            w_func=lambda t, y: np.nan + 0.0 * y,
        )
        with pytest.raises(PreconditionError, match="w is not finite"):
            simulate_wealth(constant_config, strategy, SimConfig(n_paths=4, n_steps=5))

    def test_antithetic_pairs(self, constant_config):
        bundle = simulate_wealth(
            constant_config, NO_REINSURANCE, SimConfig(n_paths=8, n_steps=5, antithetic=True, batch_size=4)
        )
        assert bundle.pair_id.tolist() == [0, 1, 0, 1, 4, 5, 4, 5]


def mean_and_stderr(sample):
    sample = np.asarray(sample, dtype=float)
    return float(np.mean(sample)), float(np.std(sample, ddof=1) / math.sqrt(sample.size))


class TestSampleStatistics:
    def test_factor_moments(self, make_config, make_line):
        cfg = make_config(line1=make_line(drift=0.3, vol=0.5, y0=0.2))
        n = 20000
        y_T = simulate_factors(cfg, SimConfig(n_paths=n, n_steps=10, seed=12)).y1[-1]
        mean, stderr = mean_and_stderr(y_T)
        assert abs(mean - 0.5) <= 4.0 * stderr
        assert np.var(y_T, ddof=1) == pytest.approx(0.25, rel=4.0 * math.sqrt(2.0 / n))

    def test_poisson_dispersion(self, make_config, make_line):
        cfg = make_config(line1=make_line(lam=5.0))
        n = 4000
        counts = simulate_claim_arrivals(cfg, 1, SimConfig(n_paths=n, n_steps=20, seed=14)).counts(n)
        mean, stderr = mean_and_stderr(counts)
        assert abs(mean - 5.0) <= 4.0 * stderr
        dispersion = np.var(counts, ddof=1) / mean
        assert abs(dispersion - 1.0) <= 4.0 * math.sqrt(2.0 / (n - 1))

    def test_counts_match_integrated_intensity(self, logistic_config):
        n = 20000
        events = simulate_claim_arrivals(logistic_config, 1, SimConfig(n_paths=n, n_steps=50, seed=15))
        mean, stderr = mean_and_stderr(events.counts(n) - events.intensity_integral)
        assert abs(mean) <= 4.0 * stderr
        assert np.std(events.intensity_integral) > 0.0

    def test_claim_totals_match_integrated_intensity(self, logistic_config):
        n = 20000
        events = simulate_claim_arrivals(logistic_config, 2, SimConfig(n_paths=n, n_steps=50, seed=16))
        mean_claim = logistic_config.line2.claims.mean
        mean, stderr = mean_and_stderr(events.total_claims(n) - mean_claim * events.intensity_integral)
        assert abs(mean) <= 4.0 * stderr

    def test_asset_mean_without_jumps(self, make_config):
        cfg = make_config(k=0.0)
        n = 20000
        p_T = simulate_asset(cfg, SimConfig(n_paths=n, n_steps=10, seed=17)).prices[-1]
        mean, stderr = mean_and_stderr(p_T)
        assert abs(mean - math.exp(0.06)) <= 4.0 * stderr

    def test_lines_are_independent(self, constant_config):
        n = 20000
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, SimConfig(n_paths=n, n_steps=10, seed=18))
        correlation = np.corrcoef(bundle.n1, bundle.n2)[0, 1]
        assert abs(correlation) <= 4.0 / math.sqrt(n)

    def test_shock_links_asset_to_second_line(self, constant_config):
        bundle = simulate_wealth(constant_config, NO_REINSURANCE, SimConfig(n_paths=2000, n_steps=10, seed=19))
        assert np.corrcoef(bundle.jump_log_return, bundle.claims2)[0, 1] < -0.5
        assert np.corrcoef(bundle.jump_log_return, bundle.claims1)[0, 1] == pytest.approx(0.0, abs=0.1)
