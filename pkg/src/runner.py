"""Experiment orchestration behind the command-line subcommands.

Every subcommand except ``figure`` validates the model first and aborts with
the validation report on hard failures. Every run writes ``manifest.json``
next to its artifacts, also when it fails.
"""

import dataclasses
import importlib.metadata
import logging
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from src.errors import (
    EXIT_OK,
    ModelError,
    PropertyViolation,
    ValidationFailure,
)
from src.file_tools import save_csv, save_json
from src.log_utils import log_function_call
from src.model.config_io import config_hash, load_config
from src.model.market import ModelConfig, risk_scale
from src.model.validation import (
    ValidationReport,
    default_sampling_grid,
    validate_admissibility,
    validate_premium,
)
from src.pde.existence import check_existence_preconditions
from src.pde.grid import DEFAULT_SPACE_STEPS, DEFAULT_TIME_STEPS, Grid1D, default_grid
from src.pde.solver import PdeSolution, solve_psi_pde
from src.pde.value import ValueFunction
from src.presets import FIGURE_RETENTIONS, FIGURE_TIME, PRESETS, preset_config
from src.sim.estimate import compare_strategies, estimate_utility
from src.sim.paths import SUMMARY_COLUMNS, simulate_wealth
from src.sim.streams import SimConfig
from src.sim.strategies import ConstantStrategy, PerturbedStrategy, Strategy
from src.strategy.comparison import (
    STATE_COLUMNS,
    SWEEP_COLUMNS,
    SWEEP_PARAMETERS,
    compare_shock_effect,
    sweep_parameter,
)
from src.strategy.field import CSV_COLUMNS, StrategyField, default_workers, tabulate_strategy
from src.strategy.solvers import evp_closed_form, h_curve, h_tilde_curve, solve_w_tilde

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

COMMANDS = ("solve", "simulate", "verify", "compare", "sweep", "figure")
STRATEGIES = ("optimal", "no-shock", "no-reinsurance")

# The strategy field is tabulated on at most this many steps per axis
STRATEGY_TIME_STEPS = 50
STRATEGY_FACTOR_STEPS = 100

DEFAULT_SWEEP_VALUES: Dict[str, Tuple[float, ...]] = {
    "k": (0.0, 0.005, 0.01, 0.015, 0.02),
    "theta_r": (0.25, 0.3, 0.4, 0.5),
    "lambda0": (1.0, 2.0, 3.0, 4.0, 5.0),
    "gamma": (0.25, 0.5, 1.0, 2.0),
}

PERTURBATIONS: Dict[str, Dict[str, float]] = {
    "w+10%": {"w_scale": 1.1},
    "w-10%": {"w_scale": 0.9},
    "u1+0.1": {"u1_shift": 0.1},
    "u1-0.1": {"u1_shift": -0.1},
    "u2+0.1": {"u2_shift": 0.1},
    "u2-0.1": {"u2_shift": -0.1},
    "u+0.1": {"u1_shift": 0.1, "u2_shift": 0.1},
    "u-0.1": {"u1_shift": -0.1, "u2_shift": -0.1},
}

VERSIONED_PACKAGES = ("shock-reinsurance", "numpy", "scipy", "structlog", "python-json-logger")


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI invocation: model source, subcommand and run settings."""

    command: str
    out_dir: Path
    config_path: Optional[Path] = None
    preset: Optional[str] = None
    seed: int = 0
    n_paths: int = 10_000
    n_steps: int = 100
    grid: Tuple[int, int] = (DEFAULT_TIME_STEPS, DEFAULT_SPACE_STEPS)
    strategy: str = "optimal"
    sweep_parameter: str = "k"
    sweep_values: Tuple[float, ...] = ()
    antithetic: bool = False
    keep_paths: bool = False
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ModelError(f"Unknown command '{self.command}', expected one of {COMMANDS}")
        if (self.config_path is None) == (self.preset is None):
            raise ModelError("Exactly one of a config file and a preset is required")
        if self.config_path is not None and not Path(self.config_path).is_file():
            logger.error(f"Config file not found: {self.config_path}")
            raise ModelError(f"Config file '{self.config_path}' does not exist")
        if self.preset is not None and self.preset not in PRESETS:
            raise ModelError(f"Unknown preset '{self.preset}', expected one of {sorted(PRESETS)}")
        if self.strategy not in STRATEGIES:
            raise ModelError(f"Unknown strategy '{self.strategy}', expected one of {STRATEGIES}")
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ModelError(
                f"Unknown sweep parameter '{self.sweep_parameter}', expected one of {SWEEP_PARAMETERS}"
            )
        if min(self.grid) < 3:
            raise ModelError(f"Grid needs at least 3 steps per axis, got {self.grid}")

    @property
    def tag(self) -> str:
        return self.preset or "custom"

    def model(self) -> ModelConfig:
        if self.preset is not None:
            return preset_config(self.preset)
        return load_config(Path(self.config_path))

    def sim_config(self) -> SimConfig:
        return SimConfig(
            n_paths=self.n_paths,
            n_steps=self.n_steps,
            seed=self.seed,
            antithetic=self.antithetic,
            keep_paths=self.keep_paths,
            workers=self.workers or default_workers(),
        )


@dataclass
class RunResult:
    command: str
    exit_code: int
    manifest: Path
    artifacts: List[Path] = field(default_factory=list)


class _Artifacts:
    """Collects the files written by one run; CSV files carry the run provenance."""

    def __init__(self, out_dir: Path, provenance: Optional[Dict[str, Any]] = None):
        self.out_dir = Path(out_dir).absolute()
        self.provenance = dict(provenance or {})
        self.paths: List[Path] = []

    def json(self, name: str, data: Any) -> Path:
        path = save_json(self.out_dir / name, data)
        self.paths.append(path)
        return path

    def csv(self, name: str, columns, rows) -> Path:
        path = save_csv(self.out_dir / name, columns, rows, provenance=self.provenance)
        self.paths.append(path)
        return path


# Shared steps


def validate_model(cfg: ModelConfig) -> ValidationReport:
    """Premium conditions of both lines plus the admissibility conditions."""
    checks = []
    for index in (1, 2):
        line = cfg.line(index)
        report = validate_premium(line, default_sampling_grid(cfg, line))
        checks.extend(dataclasses.replace(c, name=f"line{index}.{c.name}") for c in report.checks)
    admissibility = validate_admissibility(cfg)
    return ValidationReport(
        "model", checks + list(admissibility.checks), dict(admissibility.metrics)
    )


def _require_valid(cfg: ModelConfig, out: _Artifacts) -> ValidationReport:
    report = validate_model(cfg)
    out.json("validation.json", report.to_dict())
    if not report.passed:
        logger.error(report.to_text())
        raise ValidationFailure(report)
    return report


def _line_grids(spec: ExperimentSpec, cfg: ModelConfig) -> Dict[int, Grid1D]:
    m, n = spec.grid
    return {index: default_grid(cfg, index, m, n) for index in (1, 2)}


def _solve_lines(cfg: ModelConfig, grids: Dict[int, Grid1D]) -> Dict[int, PdeSolution]:
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = {index: pool.submit(solve_psi_pde, cfg, index, grids[index]) for index in (1, 2)}
        return {index: future.result() for index, future in futures.items()}


def _strategy_field(
    cfg: ModelConfig, grids: Dict[int, Grid1D], workers: Optional[int]
) -> StrategyField:
    def axis(values: np.ndarray, cap: int) -> np.ndarray:
        return np.linspace(values[0], values[-1], min(values.size - 1, cap) + 1)

    return tabulate_strategy(
        cfg,
        axis(grids[1].times, STRATEGY_TIME_STEPS),
        axis(grids[1].space, STRATEGY_FACTOR_STEPS),
        axis(grids[2].space, STRATEGY_FACTOR_STEPS),
        workers=workers,
    )


def _named_strategy(spec: ExperimentSpec, cfg: ModelConfig) -> Strategy:
    if spec.strategy == "no-reinsurance":
        return ConstantStrategy(1.0, 1.0, 0.0)
    source = cfg.without_shock() if spec.strategy == "no-shock" else cfg
    return _strategy_field(source, _line_grids(spec, cfg), spec.workers)


def _initial_value(cfg: ModelConfig, psi: Dict[int, PdeSolution]) -> Dict[str, float]:
    value = ValueFunction(cfg, psi[1], psi[2])
    args = (0.0, cfg.line1.y0, cfg.line2.y0, cfg.preferences.initial_wealth)
    return {
        "t": 0.0,
        "y1": cfg.line1.y0,
        "y2": cfg.line2.y0,
        "x": cfg.preferences.initial_wealth,
        "value": value(*args),
        "certainty_equivalent": value.certainty_equivalent(*args),
    }


# Subcommands


def _solve(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    _require_valid(cfg, out)
    out.json("existence.json", check_existence_preconditions(cfg).to_dict())
    grids = _line_grids(spec, cfg)
    psi = _solve_lines(cfg, grids)
    field_ = _strategy_field(cfg, grids, spec.workers)
    out.csv("strategy.csv", CSV_COLUMNS, field_.csv_rows())
    for index in (1, 2):
        out.csv(f"psi{index}.csv", ("t", "y", "psi"), psi[index].csv_rows())
    out.json("pde.json", {"line1": psi[1].to_dict(), "line2": psi[2].to_dict()})
    out.json("value.json", _initial_value(cfg, psi))


def _simulate(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    _require_valid(cfg, out)
    strategy = _named_strategy(spec, cfg)
    sim = spec.sim_config()
    bundle = simulate_wealth(cfg, strategy, sim)
    estimate = estimate_utility(cfg, strategy, sim, bundle=bundle)
    out.json("utility.json", {"strategy": spec.strategy, **estimate.to_dict()})
    out.csv("paths.csv", SUMMARY_COLUMNS, bundle.summary_rows())
    if sim.keep_paths:
        events = {
            f"line{index}": {
                "path": bundle.events[index].path_index,
                "times": bundle.events[index].times,
                "sizes": bundle.events[index].sizes,
            }
            for index in (1, 2)
        }
        out.json("full_paths.json", {"times": bundle.times, **bundle.paths, "events": events})


def _verify(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    _require_valid(cfg, out)
    grids = _line_grids(spec, cfg)
    psi = _solve_lines(cfg, grids)
    optimal = _strategy_field(cfg, grids, spec.workers)
    sim = spec.sim_config()

    violations: List[Dict[str, Any]] = []
    initial = _initial_value(cfg, psi)
    estimate = estimate_utility(cfg, optimal, sim)
    # PDE value against the simulated loss of the same strategy
    gap = abs(initial["value"] - estimate.mean)
    if not gap <= 3.0 * estimate.stderr + 1e-12:
        violations.append(
            {"kind": "pde_vs_monte_carlo", "value": initial["value"], "mean": estimate.mean,
             "stderr": estimate.stderr}
        )
    if estimate.n_excluded or estimate.n_aborted:
        violations.append(
            {"kind": "excluded_paths", "n_excluded": estimate.n_excluded, "n_aborted": estimate.n_aborted}
        )

    # Perturbed strategies share the random numbers of the optimal one
    others = {name: PerturbedStrategy(optimal, **kw) for name, kw in PERTURBATIONS.items()}
    comparisons = compare_strategies(cfg, optimal, others, sim)
    for comparison in comparisons:
        if comparison.difference < -2.0 * comparison.stderr:
            violations.append({"kind": "perturbation_beats_optimal", **comparison.to_dict()})

    out.json(
        "verify.json",
        {
            "value": initial,
            "estimate": estimate.to_dict(),
            "comparisons": [c.to_dict() for c in comparisons],
            "violations": violations,
            "passed": not violations,
        },
    )
    if violations:
        raise PropertyViolation(violations, "verify")


def _compare(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    _require_valid(cfg, out)
    line = cfg.line2
    spread = max(abs(v) for v in line.vol.extrema(0.0, cfg.horizon)) * math.sqrt(cfg.horizon)
    times = np.linspace(0.0, cfg.horizon, 5)
    ys = line.y0 + spread * np.linspace(-2.0, 2.0, 9)
    report = compare_shock_effect(cfg, times, ys)
    out.json("comparison.json", report.to_dict())
    out.csv("comparison.csv", STATE_COLUMNS, report.rows())


def _sweep(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    _require_valid(cfg, out)
    values = spec.sweep_values or DEFAULT_SWEEP_VALUES[spec.sweep_parameter]
    result = sweep_parameter(cfg, spec.sweep_parameter, values, 0.0, cfg.line1.y0, cfg.line2.y0)
    out.csv("sweep.csv", SWEEP_COLUMNS, result.rows)
    out.json(
        "sweep.json",
        {
            "parameter": result.parameter,
            "t": result.t,
            "y1": result.y1,
            "y2": result.y2,
            "passed": result.passed,
            "violations": result.violations,
        },
    )


def _figure(spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts) -> None:
    """Plot-ready data of the H_tilde curves and of the h curve.

    Runs without validation: the reference parameters of the first figure do
    not satisfy the exponential-moment condition.
    """
    t, y = FIGURE_TIME, cfg.line2.y0
    roots = {u: solve_w_tilde(cfg, t, y, u) for u in FIGURE_RETENTIONS}
    w_high = max(roots.values())
    w_low = min(roots.values())
    pad = max(0.25 * (w_high - w_low), 1.0)
    ws = np.linspace(w_low - pad, w_high + pad, 401)
    curves = [h_tilde_curve(cfg, t, y, u, ws) for u in FIGURE_RETENTIONS]
    out.csv(
        "figure1.csv",
        ["w"] + [f"H_tilde_u{u:g}" for u in FIGURE_RETENTIONS],
        [[float(w)] + [float(c[i]) for c in curves] for i, w in enumerate(ws)],
    )
    ordered = [roots[u] for u in sorted(FIGURE_RETENTIONS, reverse=True)]
    out.json(
        "figure1.json",
        {
            "t": t,
            "y": y,
            "roots": {f"{u:g}": w for u, w in roots.items()},
            "residuals": {
                f"{u:g}": abs(float(h_tilde_curve(cfg, t, y, u, [w])[0])) for u, w in roots.items()
            },
            "roots_decrease_in_u": all(a < b for a, b in zip(ordered, ordered[1:])),
        },
    )

    claims = cfg.line2.claims
    gb = risk_scale(cfg, t)
    phi_max = 1.0 if gb < claims.tilt_limit else 0.95 * claims.tilt_limit / gb
    phis = np.linspace(0.0, phi_max, 201)
    h = h_curve(cfg, t, phis)
    out.csv("figure2.csv", ("phi", "h"), [[float(p), float(v)] for p, v in zip(phis, h)])
    summary: Dict[str, Any] = {"t": t, "increasing": bool(np.all(np.diff(h) > 0.0))}
    if cfg.line2.premium.kind == "expected_value":
        level = (1.0 + cfg.line2.premium.theta_r) * claims.mean
        summary.update(
            level=level,
            crossings=int(np.count_nonzero(np.diff(np.sign(h - level)))),
            phi_star=evp_closed_form(cfg, t, y).phi_star,
        )
    out.json("figure2.json", summary)


HANDLERS: Dict[str, Callable[[ExperimentSpec, ModelConfig, _Artifacts], None]] = {
    "solve": _solve,
    "simulate": _simulate,
    "verify": _verify,
    "compare": _compare,
    "sweep": _sweep,
    "figure": _figure,
}


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def _config_digest(cfg: ModelConfig) -> Optional[str]:
    # custom principles and intensities have no JSON form
    try:
        return config_hash(cfg)
    except ModelError:
        return None


def _write_manifest(
    spec: ExperimentSpec, cfg: ModelConfig, out: _Artifacts, wall_time: float, status: str
) -> Path:
    digest = _config_digest(cfg)
    manifest = {
        "command": spec.command,
        "preset": spec.tag,
        "config_path": str(spec.config_path) if spec.config_path else None,
        "config_hash": digest,
        "seed": spec.seed,
        "n_paths": spec.n_paths,
        "n_steps": spec.n_steps,
        "grid": list(spec.grid),
        "versions": package_versions(),
        "wall_time_s": wall_time,
        "status": status,
        "artifacts": [p.name for p in out.paths],
    }
    return save_json(out.out_dir / "manifest.json", manifest)


@log_function_call
def run(spec: ExperimentSpec) -> RunResult:
    """Execute one subcommand.

    Raises:
        ValidationFailure: If the model fails hard validation checks.
        NumericalError: If a solver or the simulator fails.
        PropertyViolation: If ``verify`` finds violated properties.
    """
    started = time.perf_counter()
    cfg = spec.model()
    out = _Artifacts(
        spec.out_dir,
        {"command": spec.command, "preset": spec.tag, "seed": spec.seed, "config_hash": _config_digest(cfg)},
    )
    status = "ok"
    try:
        HANDLERS[spec.command](spec, cfg, out)
    except Exception as e:
        status = f"{type(e).__name__}: {e}"
        raise
    finally:
        manifest = _write_manifest(spec, cfg, out, time.perf_counter() - started, status)
        structured_logger.info(
            "Run finished", command=spec.command, preset=spec.tag, status=status,
            artifacts=len(out.paths),
        )
    return RunResult(spec.command, EXIT_OK, manifest, list(out.paths))
