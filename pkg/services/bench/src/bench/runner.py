"""Suite execution: one minimize call per (problem, solver, seed).

Runs are independent and go through a process pool when more than one
worker is requested; traces and summaries are written by the parent process
after all runs finish.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd
from loguru import logger
from structqn_core.errors import TooFewSolversError
from structqn_core.models.config import SolverConfig
from structqn_core.models.report import RunReport, TraceRecord
from structqn_problems.registry import build_problem
from structqn_solvers import minimize

from bench.config import SuiteConfig
from bench.profiles import CONVERGED, emit_profile_plotdata, performance_profile

ERROR_STATUS = "error"
FAILED_STATUS = "failed"
TRACE_COLUMNS = list(TraceRecord.model_fields)
SUMMARY_COLUMNS = [
    "problem",
    "solver",
    "seed",
    "status",
    "iters",
    "f_evals",
    "time",
    "final_f",
    "final_gnorm_inf",
    "mean_sigma",
    "rejected_pairs",
    "fallback_steps",
]
MEAN_COLUMNS = ["iters", "f_evals", "time", "final_f", "final_gnorm_inf", "mean_sigma"]


@dataclass(frozen=True)
class RunTask:
    problem: str
    generator: str
    params: dict[str, Any]
    seed: int | None
    solver: str
    config: SolverConfig

    @property
    def trace_name(self) -> str:
        suffix = f"__seed{self.seed}" if self.seed is not None else ""
        return f"{self.problem}__{self.solver}{suffix}.csv"


@dataclass
class RunOutcome:
    task: RunTask
    report: RunReport | None = None
    error: str | None = None

    @property
    def status(self) -> str:
        return str(self.report.status) if self.report is not None else ERROR_STATUS

    def summary_row(self) -> dict[str, Any]:
        row: dict[str, Any] = dict.fromkeys(SUMMARY_COLUMNS)
        row.update(
            problem=self.task.problem,
            solver=self.task.solver,
            seed=self.task.seed,
            status=self.status,
        )
        if self.report is not None:
            row.update(
                iters=self.report.iterations,
                f_evals=self.report.f_evals,
                time=self.report.wall_time,
                final_f=self.report.final_f,
                final_gnorm_inf=self.report.final_gnorm_inf,
                mean_sigma=self.report.mean_sigma(),
                rejected_pairs=self.report.rejected_pairs,
                fallback_steps=self.report.fallback_steps,
            )
        return row


def expand_tasks(config: SuiteConfig) -> list[RunTask]:
    """All (problem, seed, solver) combinations in config order."""
    return [
        RunTask(
            problem=entry.label,
            generator=entry.generator,
            params=dict(entry.params),
            seed=seed,
            solver=solver.name,
            config=solver.config,
        )
        for entry in config.problems
        for seed in entry.run_seeds()
        for solver in config.solvers
    ]


def execute(task: RunTask) -> RunOutcome:
    """
    Build the problem and run the solver; never raises.

    The `time` column is the report's wall time around minimize only, so
    problem construction is not counted.
    """
    try:
        params = dict(task.params)
        if task.seed is not None:
            params["seed"] = task.seed
        problem = build_problem(task.generator, params)
        report = minimize(problem, cfg=task.config)
    except Exception as e:
        logger.error(f"❌ {task.problem} / {task.solver} (seed={task.seed}) failed: {e}")
        return RunOutcome(task, error=f"{type(e).__name__}: {e}")
    return RunOutcome(task, report=report)


def write_trace(report: RunReport, path: Path) -> None:
    rows = [record.model_dump() for record in report.trace]
    pd.DataFrame(rows, columns=TRACE_COLUMNS).to_csv(path, index=False)


def summarize(outcomes: list[RunOutcome]) -> pd.DataFrame:
    frame = pd.DataFrame([o.summary_row() for o in outcomes], columns=SUMMARY_COLUMNS)
    numeric = SUMMARY_COLUMNS[4:]
    frame[numeric] = frame[numeric].apply(pd.to_numeric)
    return frame.astype({"seed": "Int64"})


def average_over_seeds(summary: pd.DataFrame) -> pd.DataFrame:
    """
    Mean of every numeric column per (problem, solver).

    A pair is `converged` only if all its seeds converged, otherwise `failed`.
    """
    grouped = summary.groupby(["problem", "solver"], sort=False)
    means = grouped[MEAN_COLUMNS].mean()
    means.insert(0, "n_seeds", grouped.size())
    means.insert(
        0,
        "status",
        grouped["status"].agg(
            lambda s: CONVERGED if (s == CONVERGED).all() else FAILED_STATUS
        ),
    )
    return means.reset_index()


def _run_all(tasks: list[RunTask], workers: int) -> list[RunOutcome]:
    if workers <= 1 or len(tasks) <= 1:
        return [execute(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, tasks))


def run_suite(config: SuiteConfig, output_dir: str | Path | None = None, workers: int = 1) -> Path:
    """
    Run every configured (problem, solver, seed) triple and write the results.

    Layout of the output directory:

    - ``traces/<problem>__<solver>[__seed<k>].csv``: per-iteration trace
    - ``summary.csv``: one row per run
    - ``summary_mean.csv``: runs averaged over seeds
    - ``profile_<metric>.csv``: profile plot data for each configured metric

    Failed runs are recorded with status ``error`` and never stop the suite.

    Returns:
        The output directory
    """
    out = Path(output_dir or config.suite.output)
    traces = out / "traces"
    traces.mkdir(parents=True, exist_ok=True)
    tasks = expand_tasks(config)
    logger.info(f"🚀 Suite {config.suite.name}: {len(tasks)} runs on {workers} worker(s)")

    outcomes = _run_all(tasks, workers)
    for outcome in outcomes:
        if outcome.report is not None:
            write_trace(outcome.report, traces / outcome.task.trace_name)

    summary = summarize(outcomes)
    summary.to_csv(out / "summary.csv", index=False)
    average_over_seeds(summary).to_csv(out / "summary_mean.csv", index=False)
    logger.info(f"📝 Wrote summary of {len(summary)} runs to {out}")

    for metric in config.metrics:
        try:
            table = performance_profile(summary, metric)
        except TooFewSolversError as e:
            logger.warning(f"⚠️ Skipping {metric} profile: {e}")
            continue
        emit_profile_plotdata(table, out / f"profile_{metric}.csv")

    converged = int((summary["status"] == CONVERGED).sum())
    errors = int((summary["status"] == ERROR_STATUS).sum())
    logger.info(f"📊 {converged}/{len(summary)} runs converged, {errors} errors")
    return out
