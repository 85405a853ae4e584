"""Tests for simulation settings and random streams."""

import numpy as np
import pytest

from src.errors import ModelError
from src.sim.streams import SimConfig, batch_streams, standard_normals


class TestSimConfig:
    def test_batches_cover_all_paths(self):
        sim = SimConfig(n_paths=10, n_steps=5, batch_size=4)
        assert sim.batches() == [(0, 4), (4, 4), (8, 2)]

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_paths": 0, "n_steps": 5},
            {"n_paths": 10, "n_steps": 0},
            {"n_paths": 10, "n_steps": 5, "seed": -1},
            {"n_paths": 10, "n_steps": 5, "workers": 0},
            {"n_paths": 11, "n_steps": 5, "antithetic": True},
            {"n_paths": 10, "n_steps": 5, "antithetic": True, "batch_size": 3},
        ],
    )
    def test_invalid_settings(self, kwargs):
        with pytest.raises(ModelError):
            SimConfig(**kwargs)


class TestStreams:
    def test_same_batch_same_draws(self):
        sim = SimConfig(n_paths=8, n_steps=4, seed=5)
        first, second = batch_streams(sim, 1), batch_streams(sim, 1)
        assert first.market.random() == second.market.random()
        assert first.factor(2).random() == second.factor(2).random()

    def test_batches_and_streams_differ(self):
        sim = SimConfig(n_paths=8, n_steps=4, seed=5)
        assert batch_streams(sim, 0).market.random() != batch_streams(sim, 1).market.random()
        other = SimConfig(n_paths=8, n_steps=4, seed=5, stream_id=1)
        assert batch_streams(sim, 0).market.random() != batch_streams(other, 0).market.random()

    def test_claims_generator_replays(self):
        streams = batch_streams(SimConfig(n_paths=8, n_steps=4), 0)
        assert streams.claims(1).random() == streams.claims(1).random()
        assert streams.claims(1).random() != streams.claims(2).random()


def test_antithetic_normals_mirror():
    rng = np.random.default_rng(0)
    draws = standard_normals(rng, 3, 6, antithetic=True)
    assert draws.shape == (3, 6)
    assert np.array_equal(draws[:, 3:], -draws[:, :3])
