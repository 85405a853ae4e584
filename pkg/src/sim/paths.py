"""Path simulation of the coupled insurance-financial market.

Factors move by exact Gaussian steps. Claim arrivals are Cox processes
generated by thinning: on each time step proposals come from a Poisson
process with the step maximum of the bound delta and are accepted with
probability lam(s, Y_s) / delta_max, the factor being interpolated linearly
between grid nodes. The asset takes exact log-normal steps and drops by
(1 - k(s) z) at every line-2 claim. Wealth is accumulated in horizon units
X(t) B(t, T), with controls frozen at the left node of each step.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import structlog
from scipy import integrate

from src.errors import DominanceError, NumericalError, PreconditionError
from src.log_utils import log_function_call
from src.model.market import ModelConfig, accumulation_to_horizon
from src.sim.streams import SimConfig, batch_streams, standard_normals
from src.sim.strategies import Strategy

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Relative slack when comparing lam with the bound delta
DOMINANCE_TOL = 1e-9

SUMMARY_COLUMNS = ("path", "x_T", "n1", "n2", "p_T", "aborted")


def time_grid(cfg: ModelConfig, sim: SimConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.horizon, sim.n_steps + 1)


@dataclass(frozen=True, eq=False)
class FactorPaths:
    times: np.ndarray
    y1: np.ndarray
    y2: np.ndarray

    def line(self, index: int) -> np.ndarray:
        return self.y1 if index == 1 else self.y2


@dataclass(frozen=True, eq=False)
class ClaimEvents:
    """Accepted claims of one line, sorted by (path, time).

    ``steps[i]`` is the time step containing event i; ``aborted`` flags paths
    on which lam exceeded delta and ``intensity_integral`` holds the trapezoid
    estimate of int_0^T lam(t, Y_t) dt per path.
    """

    path_index: np.ndarray
    times: np.ndarray
    sizes: np.ndarray
    steps: np.ndarray
    aborted: np.ndarray
    intensity_integral: np.ndarray

    def counts(self, n_paths: int) -> np.ndarray:
        return np.bincount(self.path_index, minlength=n_paths)

    def total_claims(self, n_paths: int) -> np.ndarray:
        return np.bincount(self.path_index, weights=self.sizes, minlength=n_paths)

    def for_path(self, path: int) -> Dict[str, np.ndarray]:
        mask = self.path_index == path
        return {"times": self.times[mask], "sizes": self.sizes[mask]}


@dataclass(frozen=True, eq=False)
class AssetPaths:
    times: np.ndarray
    prices: np.ndarray
    jump_log_return: np.ndarray


@dataclass(frozen=True, eq=False)
class PathBundle:
    """Per-path results of a wealth simulation.

    Full paths (factors, asset, wealth and event lists) are only kept when the
    simulation was asked to keep them.
    """

    times: np.ndarray
    x_T: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    p_T: np.ndarray
    claims1: np.ndarray
    claims2: np.ndarray
    intensity_integral1: np.ndarray
    intensity_integral2: np.ndarray
    jump_log_return: np.ndarray
    aborted: np.ndarray
    pair_id: np.ndarray
    paths: Optional[Dict[str, np.ndarray]] = None
    events: Optional[Dict[int, ClaimEvents]] = None

    @property
    def n_paths(self) -> int:
        return int(self.x_T.size)

    def summary_rows(self) -> List[List[float]]:
        return [
            [i, float(self.x_T[i]), int(self.n1[i]), int(self.n2[i]), float(self.p_T[i]), int(self.aborted[i])]
            for i in range(self.n_paths)
        ]


# Batch kernels


def _factor_batch(
    cfg: ModelConfig, line: int, times: np.ndarray, rng: np.random.Generator, size: int, antithetic: bool
) -> np.ndarray:
    ins = cfg.line(line)
    # Exact Gaussian increments: mean int b, variance int a^2
    means = np.asarray(ins.drift.integral(times[:-1], times[1:]), dtype=float)
    stds = np.sqrt([ins.vol.squared_integral(float(a), float(b)) for a, b in zip(times[:-1], times[1:])])
    shocks = standard_normals(rng, times.size - 1, size, antithetic)
    paths = np.empty((times.size, size))
    paths[0] = ins.y0
    paths[1:] = ins.y0 + np.cumsum(means[:, None] + stds[:, None] * shocks, axis=0)
    return paths


def _arrival_batch(
    cfg: ModelConfig, line: int, times: np.ndarray, ys: np.ndarray, rng: np.random.Generator
) -> ClaimEvents:
    ins = cfg.line(line)
    size = ys.shape[1]
    aborted = np.zeros(size, dtype=bool)
    found = {"path": [], "time": [], "step": []}
    for j in range(times.size - 1):
        t0, t1 = float(times[j]), float(times[j + 1])
        dt = t1 - t0
        # Proposals at the step maximum of delta
        majorant = ins.bound.extrema(t0, t1)[1]
        if majorant <= 0.0:
            continue
        counts = rng.poisson(majorant * dt, size)
        total = int(counts.sum())
        if total == 0:
            continue
        # Proposal times uniform on the step, factor interpolated linearly
        path = np.repeat(np.arange(size), counts)
        s = t0 + dt * rng.random(total)
        weight = (s - t0) / dt
        y_s = ys[j, path] * (1.0 - weight) + ys[j + 1, path] * weight
        lam = np.asarray(ins.lam(s, y_s), dtype=float)
        # lam above delta invalidates thinning on that path
        dominated = lam <= np.asarray(ins.bound(s)) * (1.0 + DOMINANCE_TOL) + DOMINANCE_TOL
        if not np.all(dominated):
            worst = int(np.argmax(lam - np.asarray(ins.bound(s))))
            logger.warning(
                f"Line {line}: lam={lam[worst]:.6g} exceeds delta={float(ins.bound(s[worst])):.6g} "
                f"at t={s[worst]:.6g}, y={y_s[worst]:.6g}; aborting affected paths"
            )
            aborted[path[~dominated]] = True
        # Accept with probability lam / majorant
        accept = rng.random(total) * majorant < lam
        found["path"].append(path[accept])
        found["time"].append(s[accept])
        found["step"].append(np.full(int(accept.sum()), j))

    path_index = np.concatenate(found["path"]) if found["path"] else np.zeros(0, dtype=int)
    event_times = np.concatenate(found["time"]) if found["time"] else np.zeros(0)
    steps = np.concatenate(found["step"]) if found["step"] else np.zeros(0, dtype=int)
    # Sort by (path, time); sizes are drawn after all arrivals
    order = np.lexsort((event_times, path_index))
    sizes = ins.claims.sample(rng, int(order.size)) if order.size else np.zeros(0)

    # Compensator int lam dt per path, trapezoid on the nodes
    lam_nodes = np.vstack([np.broadcast_to(ins.lam(float(t), ys[i]), (size,)) for i, t in enumerate(times)])
    intensity_integral = integrate.trapezoid(lam_nodes, times, axis=0)
    return ClaimEvents(
        path_index[order].astype(int),
        event_times[order],
        np.asarray(sizes, dtype=float),
        steps[order].astype(int),
        aborted,
        intensity_integral,
    )


def _jump_factors(cfg: ModelConfig, events: ClaimEvents) -> np.ndarray:
    """1 - K(s, z) at every line-2 event."""
    factors = 1.0 - np.asarray(cfg.market.jump(events.times, events.sizes), dtype=float)
    if factors.size and np.min(factors) <= 0.0:
        worst = int(np.argmin(factors))
        logger.error(f"Asset jump 1 - K = {factors[worst]} at t={events.times[worst]}")
        raise NumericalError(
            f"Claim of size {events.sizes[worst]:.6g} at t={events.times[worst]:.6g} "
            "wipes out the asset (K(t, z) >= 1)"
        )
    return factors


def _asset_batch(
    cfg: ModelConfig, times: np.ndarray, shocks: np.ndarray, events: ClaimEvents, size: int
) -> AssetPaths:
    market = cfg.market
    variances = np.array([market.sigma.squared_integral(float(a), float(b)) for a, b in zip(times[:-1], times[1:])])
    drift = np.asarray(market.mu.integral(times[:-1], times[1:]), dtype=float) - 0.5 * variances
    increments = drift[:, None] + np.sqrt(variances)[:, None] * shocks
    # Every line-2 claim multiplies the price by 1 - K(s, z)
    jumps = np.zeros_like(increments)
    np.add.at(jumps, (events.steps, events.path_index), np.log(_jump_factors(cfg, events)))
    log_prices = np.empty((times.size, size))
    log_prices[0] = np.log(market.p0)
    log_prices[1:] = log_prices[0] + np.cumsum(increments + jumps, axis=0)
    return AssetPaths(times, np.exp(log_prices), jumps.sum(axis=0))


def _controls(strategy: Strategy, t: float, y1: np.ndarray, y2: np.ndarray):
    values = [
        np.broadcast_to(np.asarray(strategy.u1(t, y1), dtype=float), y1.shape),
        np.broadcast_to(np.asarray(strategy.u2(t, y2), dtype=float), y2.shape),
        np.broadcast_to(np.asarray(strategy.w(t, y2), dtype=float), y2.shape),
    ]
    for name, value in zip(("u1", "u2", "w"), values):
        if not np.all(np.isfinite(value)):
            logger.error(f"Strategy returned a non-finite {name} at t={t}")
            raise PreconditionError(f"Strategy is not evaluable: {name} is not finite at t={t}")
    return values


def _horizon_weight_integrals(cfg: ModelConfig, times: np.ndarray) -> np.ndarray:
    """Simpson estimate of int B(s, T) ds over every step."""
    mids = 0.5 * (times[:-1] + times[1:])
    nodes = np.asarray(accumulation_to_horizon(cfg, times))
    middle = np.asarray(accumulation_to_horizon(cfg, mids))
    return np.diff(times) / 6.0 * (nodes[:-1] + 4.0 * middle + nodes[1:])


def _wealth_batch(
    cfg: ModelConfig,
    strategy: Strategy,
    times: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    shocks: np.ndarray,
    events1: ClaimEvents,
    events2: ClaimEvents,
) -> np.ndarray:
    """Wealth in horizon units X(t_j) B(t_j, T) at every node."""
    market = cfg.market
    n_steps, size = shocks.shape
    weights = _horizon_weight_integrals(cfg, times)
    at_nodes = np.asarray(accumulation_to_horizon(cfg, times))
    # Per-step market integrals
    excess = np.asarray(market.mu.integral(times[:-1], times[1:])) - np.asarray(
        market.r.integral(times[:-1], times[1:])
    )
    stds = np.sqrt([market.sigma.squared_integral(float(a), float(b)) for a, b in zip(times[:-1], times[1:])])

    increments = np.empty((n_steps, size))
    u1 = np.empty((n_steps, size))
    u2 = np.empty((n_steps, size))
    w = np.empty((n_steps, size))
    for j in range(n_steps):
        t = float(times[j])
        # Controls frozen at the left node
        u1[j], u2[j], w[j] = _controls(strategy, t, y1[j], y2[j])
        premium = (
            cfg.line1.c(t, y1[j]) - cfg.line1.q(t, y1[j], u1[j])
            + cfg.line2.c(t, y2[j]) - cfg.line2.q(t, y2[j], u2[j])
        )
        investment = at_nodes[j] * w[j] * (excess[j] + stds[j] * shocks[j])
        increments[j] = premium * weights[j] + investment

    # One lump deduction per claim, discounted to the horizon
    for line, events, retention in ((1, events1, u1), (2, events2, u2)):
        scale = np.asarray(accumulation_to_horizon(cfg, events.times))
        loss = events.sizes * retention[events.steps, events.path_index]
        if line == 2:
            # the asset position loses w K(s, z) at the same instant
            loss = loss + w[events.steps, events.path_index] * np.asarray(
                market.jump(events.times, events.sizes)
            )
        np.add.at(increments, (events.steps, events.path_index), -scale * loss)

    wealth = np.empty((n_steps + 1, size))
    wealth[0] = cfg.preferences.initial_wealth * at_nodes[0]
    wealth[1:] = wealth[0] + np.cumsum(increments, axis=0)
    return wealth


@dataclass(frozen=True, eq=False)
class _Batch:
    start: int
    factors: FactorPaths
    events1: ClaimEvents
    events2: ClaimEvents
    asset: Optional[AssetPaths] = None
    wealth: Optional[np.ndarray] = None


def _simulate_batch(
    cfg: ModelConfig,
    sim: SimConfig,
    batch_index: int,
    start: int,
    size: int,
    strategy: Optional[Strategy] = None,
    with_asset: bool = True,
) -> _Batch:
    times = time_grid(cfg, sim)
    streams = batch_streams(sim, batch_index)
    # Factors and claims come first; their streams do not depend on the strategy
    y1 = _factor_batch(cfg, 1, times, streams.factor(1), size, sim.antithetic)
    y2 = _factor_batch(cfg, 2, times, streams.factor(2), size, sim.antithetic)
    events1 = _arrival_batch(cfg, 1, times, y1, streams.claims(1))
    events2 = _arrival_batch(cfg, 2, times, y2, streams.claims(2))
    asset = wealth = None
    if with_asset or strategy is not None:
        shocks = standard_normals(streams.market, sim.n_steps, size, sim.antithetic)
        asset = _asset_batch(cfg, times, shocks, events2, size)
        if strategy is not None:
            wealth = _wealth_batch(cfg, strategy, times, y1, y2, shocks, events1, events2)
    return _Batch(start, FactorPaths(times, y1, y2), events1, events2, asset, wealth)


def _run_batches(cfg: ModelConfig, sim: SimConfig, **kwargs) -> List[_Batch]:
    jobs = list(enumerate(sim.batches()))
    # Batches are independent; results keep the batch order
    with ThreadPoolExecutor(max_workers=sim.workers) as pool:
        return list(
            pool.map(lambda job: _simulate_batch(cfg, sim, job[0], job[1][0], job[1][1], **kwargs), jobs)
        )


def _merge_events(batches: List[_Batch], line: int) -> ClaimEvents:
    parts = [b.events1 if line == 1 else b.events2 for b in batches]
    return ClaimEvents(
        np.concatenate([p.path_index + b.start for p, b in zip(parts, batches)]),
        np.concatenate([p.times for p in parts]),
        np.concatenate([p.sizes for p in parts]),
        np.concatenate([p.steps for p in parts]),
        np.concatenate([p.aborted for p in parts]),
        np.concatenate([p.intensity_integral for p in parts]),
    )


# Public operations


def simulate_factors(cfg: ModelConfig, sim: SimConfig) -> FactorPaths:
    """Factor paths of both lines on the simulation grid, shape (n_steps + 1, n_paths)."""
    batches = _run_batches(cfg, sim, with_asset=False)
    return FactorPaths(
        time_grid(cfg, sim),
        np.hstack([b.factors.y1 for b in batches]),
        np.hstack([b.factors.y2 for b in batches]),
    )


def simulate_claim_arrivals(cfg: ModelConfig, line: int, sim: SimConfig) -> ClaimEvents:
    """Claims of one line along the factor paths of ``simulate_factors(cfg, sim)``."""
    return _merge_events(_run_batches(cfg, sim, with_asset=False), line)


def simulate_asset(cfg: ModelConfig, sim: SimConfig) -> AssetPaths:
    """Asset paths driven by the line-2 claims of the same run."""
    batches = _run_batches(cfg, sim)
    return AssetPaths(
        time_grid(cfg, sim),
        np.hstack([b.asset.prices for b in batches]),
        np.concatenate([b.asset.jump_log_return for b in batches]),
    )


@log_function_call
def simulate_wealth(cfg: ModelConfig, strategy: Strategy, sim: SimConfig) -> PathBundle:
    """Simulate the whole market and the wealth controlled by ``strategy``.

    Identical (cfg, sim) give bit-identical bundles; only the wealth depends on
    the strategy.

    Raises:
        PreconditionError: If the strategy is not finite somewhere on a path.
        NumericalError: If a claim would push the asset price to zero.
        DominanceError: If lam exceeds delta on every path.
    """
    batches = _run_batches(cfg, sim, strategy=strategy)
    events = {1: _merge_events(batches, 1), 2: _merge_events(batches, 2)}
    n = sim.n_paths
    wealth = [b.wealth for b in batches]
    aborted = events[1].aborted | events[2].aborted
    x_T = np.concatenate([w[-1] for w in wealth])
    x_T = np.where(aborted, np.nan, x_T)
    if aborted.all():
        logger.error("Every simulated path violated the intensity bound")
        raise DominanceError("lam(t, Y_t) exceeded delta(t) on every path; raise the bound")

    pair_id = np.arange(n)
    if sim.antithetic:
        pair_id = np.concatenate(
            [start + np.arange(size) % (size // 2) for start, size in sim.batches()]
        )

    paths = None
    kept_events = None
    if sim.keep_paths:
        at_nodes = np.asarray(accumulation_to_horizon(cfg, time_grid(cfg, sim)))
        paths = {
            "y1": np.hstack([b.factors.y1 for b in batches]),
            "y2": np.hstack([b.factors.y2 for b in batches]),
            "p": np.hstack([b.asset.prices for b in batches]),
            "x": np.hstack(wealth) / at_nodes[:, None],
        }
        kept_events = events

    bundle = PathBundle(
        times=time_grid(cfg, sim),
        x_T=x_T,
        n1=events[1].counts(n),
        n2=events[2].counts(n),
        p_T=np.concatenate([b.asset.prices[-1] for b in batches]),
        claims1=events[1].total_claims(n),
        claims2=events[2].total_claims(n),
        intensity_integral1=events[1].intensity_integral,
        intensity_integral2=events[2].intensity_integral,
        jump_log_return=np.concatenate([b.asset.jump_log_return for b in batches]),
        aborted=aborted,
        pair_id=pair_id,
        paths=paths,
        events=kept_events,
    )
    structured_logger.info(
        "Wealth simulated",
        n_paths=n,
        n_steps=sim.n_steps,
        aborted=int(aborted.sum()),
        mean_events1=float(np.mean(bundle.n1)),
        mean_events2=float(np.mean(bundle.n2)),
    )
    return bundle
