"""Simulation settings and reproducible random streams.

Paths are simulated in batches. Batch b of a run draws from four independent
generators derived from (seed, stream_id, b): the asset Brownian motion, the
two factor Brownian motions, and claims (arrival thinning and claim sizes,
one child per line). The noise therefore never depends on the strategy being
simulated, which is what paired comparisons rely on.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.errors import ModelError

DEFAULT_BATCH_SIZE = 4096


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    n_steps: int
    seed: int = 0
    antithetic: bool = False
    stream_id: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE
    keep_paths: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_paths < 1 or self.n_steps < 1:
            raise ModelError(
                f"Simulation needs n_paths >= 1 and n_steps >= 1, got {self.n_paths}, {self.n_steps}"
            )
        if self.batch_size < 1 or self.workers < 1:
            raise ModelError("batch_size and workers must be positive")
        if self.seed < 0:
            raise ModelError(f"Seed must be non-negative, got {self.seed}")
        if self.antithetic and (self.n_paths % 2 or self.batch_size % 2):
            raise ModelError("Antithetic sampling needs an even number of paths and an even batch size")

    def batches(self) -> List[Tuple[int, int]]:
        """(first path index, size) of every batch."""
        return [
            (start, min(self.batch_size, self.n_paths - start))
            for start in range(0, self.n_paths, self.batch_size)
        ]


@dataclass(frozen=True)
class BatchStreams:
    market: np.random.Generator
    factor1: np.random.Generator
    factor2: np.random.Generator
    claims_seed: np.random.SeedSequence

    def factor(self, line: int) -> np.random.Generator:
        return self.factor1 if line == 1 else self.factor2

    def claims(self, line: int) -> np.random.Generator:
        """Fresh generator for the claims of one line; repeated calls replay it."""
        seq = np.random.SeedSequence(
            self.claims_seed.entropy, spawn_key=tuple(self.claims_seed.spawn_key) + (line,)
        )
        return np.random.default_rng(seq)


def batch_streams(sim: SimConfig, batch_index: int) -> BatchStreams:
    root = np.random.SeedSequence(sim.seed, spawn_key=(sim.stream_id, batch_index))
    # Independent streams per batch; claims keep their seed for replay
    market, factor1, factor2, claims = root.spawn(4)
    return BatchStreams(
        np.random.default_rng(market),
        np.random.default_rng(factor1),
        np.random.default_rng(factor2),
        claims,
    )


def standard_normals(rng: np.random.Generator, n_steps: int, size: int, antithetic: bool) -> np.ndarray:
    """(n_steps, size) normals; the second half negates the first when antithetic."""
    if not antithetic:
        return rng.standard_normal((n_steps, size))
    # Second half of the batch mirrors the first
    half = rng.standard_normal((n_steps, size // 2))
    return np.concatenate((half, -half), axis=1)
