"""structqn-bench command line.

    structqn-bench run suite.toml [--output DIR] [--workers N]
    structqn-bench profile results/summary.csv --metric iterations [--failure-policy drop]
    structqn-bench gradcheck structured_quartic:n=100,seed=0

Exit codes: 0 on success, 2 on invalid configuration, 1 when a gradient
check fails or any other structqn error stops the command. Runs that fail
inside a suite are recorded in the summary and do not change the exit code.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from loguru import logger
from structqn_common.log import configure_logging
from structqn_common.settings import load_settings
from structqn_core.errors import ConfigError, StructQnError
from structqn_problems.gradcheck import fd_gradient_check
from structqn_problems.registry import problem_from_spec

from bench.config import load_suite
from bench.profiles import FailurePolicy, Metric, emit_profile_plotdata, performance_profile
from bench.runner import run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
GRADCHECK_TOL = 1e-5


def _run(args: argparse.Namespace, default_workers: int) -> int:
    config = load_suite(args.config)
    workers = args.workers if args.workers is not None else default_workers
    if workers < 1:
        raise ConfigError(f"must be at least 1, got {workers}", "workers")
    run_suite(config, args.output, workers)
    return EXIT_OK


def _profile(args: argparse.Namespace) -> int:
    path = Path(args.summary)
    if not path.is_file():
        raise ConfigError(f"summary file not found: {path}", "summary")
    output = args.output or path.with_name(f"profile_{args.metric}.csv")
    table = performance_profile(pd.read_csv(path), args.metric, args.failure_policy)
    emit_profile_plotdata(table, output)
    for solver in table.solvers:
        logger.info(
            f"📊 {solver}: ρ(1)={table.rho_at(solver, 1.0):.3f} "
            f"solved={table.solved_fraction(solver):.3f}"
        )
    return EXIT_OK


def _gradcheck(args: argparse.Namespace) -> int:
    problem = problem_from_spec(args.problem)
    error = fd_gradient_check(problem, problem.initial_point())
    print(f"{problem.name}: relative gradient error {error:.3e}")
    if error > GRADCHECK_TOL:
        logger.error(f"❌ Gradient check failed for {problem.name} ({error:.3e} > {GRADCHECK_TOL})")
        return EXIT_FAILED
    logger.info(f"✅ Gradient check passed for {problem.name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structqn-bench",
        description="Benchmark structured quasi-Newton solvers.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a benchmark suite from a TOML file.")
    run.add_argument("config", help="Suite configuration file.")
    run.add_argument("--output", default=None, help="Results directory (overrides [suite].output).")
    run.add_argument("--workers", type=int, default=None, help="Worker processes.")

    profile = commands.add_parser("profile", help="Performance profile from a summary CSV.")
    profile.add_argument("summary", help="summary.csv written by `run`.")
    profile.add_argument(
        "--metric", choices=[m.value for m in Metric], default=Metric.ITERATIONS.value
    )
    profile.add_argument(
        "--failure-policy",
        choices=[p.value for p in FailurePolicy],
        default=FailurePolicy.INFINITE.value,
    )
    profile.add_argument("--output", default=None, help="Plot data CSV.")

    gradcheck = commands.add_parser("gradcheck", help="Finite-difference gradient check.")
    gradcheck.add_argument("problem", help="Problem spec, e.g. structured_quartic:n=100,seed=0.")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
        configure_logging(settings.log_level)
        match args.command:
            case "run":
                return _run(args, settings.workers)
            case "profile":
                return _profile(args)
            case "gradcheck":
                return _gradcheck(args)
    except ConfigError as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    except StructQnError as e:
        logger.error(f"❌ {e}")
        return EXIT_FAILED
    return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
