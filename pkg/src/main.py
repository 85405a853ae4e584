# src/main.py

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import structlog

from src.errors import EXIT_OK, ValidationFailure, exit_code_for
from src.log_utils import setup_logging
from src.presets import PRESETS
from src.runner import COMMANDS, STRATEGIES, ExperimentSpec, run
from src.strategy.comparison import SWEEP_PARAMETERS

# Create loggers
stdlogger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)


def parse_grid(value: str) -> Tuple[int, int]:
    """Parse an ``MxN`` grid size such as ``200x120``."""
    try:
        m, n = (int(part) for part in value.lower().split("x"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Grid must look like 200x400, got '{value}'") from e
    if m < 3 or n < 3:
        raise argparse.ArgumentTypeError(f"Grid needs at least 3 steps per axis, got '{value}'")
    return m, n


def parse_values(value: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got '{value}'") from e


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(
        description="Optimal reinsurance and investment under common-shock dependence"
    )
    # Subcommand and model source
    parser.add_argument("command", choices=COMMANDS, help="Subcommand to run")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="Model configuration (JSON)")
    source.add_argument("--preset", choices=sorted(PRESETS), help="Named model configuration")

    # Output and Monte-Carlo settings
    parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory (default: out)")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("--paths", type=int, default=10_000, help="Monte-Carlo paths (default: 10000)")
    parser.add_argument("--steps", type=int, default=100, help="Simulation time steps (default: 100)")
    parser.add_argument(
        "--grid", type=parse_grid, default=(200, 400), help="PDE grid MxN (default: 200x400)"
    )

    # Subcommand-specific options
    parser.add_argument(
        "--strategy", choices=STRATEGIES, default="optimal", help="Strategy for 'simulate'"
    )
    parser.add_argument(
        "--parameter", choices=SWEEP_PARAMETERS, default="k", help="Parameter for 'sweep'"
    )
    parser.add_argument("--values", type=parse_values, default=(), help="Sweep values, comma-separated")
    parser.add_argument("--antithetic", action="store_true", help="Use antithetic normals")
    parser.add_argument("--keep-paths", action="store_true", help="Also write full simulated paths")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: SHOCKREINS_THREADS or CPU count)")

    # Logging options
    parser.add_argument(
        "--log-level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set logging level (default: INFO)",
    )
    parser.add_argument(
        "--log-file",
        type=str,
        default=None,
        help="Path for structured JSON logs. If not specified, only console logging is used.",
    )
    return parser.parse_args(argv)


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    return ExperimentSpec(
        command=args.command,
        out_dir=args.out,
        config_path=args.config,
        preset=args.preset,
        seed=args.seed,
        n_paths=args.paths,
        n_steps=args.steps,
        grid=args.grid,
        strategy=args.strategy,
        sweep_parameter=args.parameter,
        sweep_values=args.values,
        antithetic=args.antithetic,
        keep_paths=args.keep_paths,
        workers=args.workers,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point; returns the process exit code.
    """
    # Parse command line arguments and configure logging
    args = parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    structured_logger.debug("Structured logger initialized in main", log_level=args.log_level)

    # Failures map to the exit codes in src.errors
    try:
        spec = spec_from_args(args)
        result = run(spec)
    except ValidationFailure as e:
        stdlogger.error(f"{e}\n{e.report.to_text()}")
        return exit_code_for(e)
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            stdlogger.error(f"Unexpected error: {e}", exc_info=True)
        else:
            stdlogger.error(f"{type(e).__name__}: {e}")
        return code

    stdlogger.info(f"{result.command} finished; {len(result.artifacts)} artifact(s) in {spec.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
