"""Extended performance profiles.

For problem p and solver s the ratio is measured against the best *other*
solver,

    π_{p,s} = t_{p,s} / min_{i≠s} t_{p,i},

so values below 1 mean s beat every competitor. ρ_s(τ) is the fraction of
problems with π_{p,s} ≤ τ. Failed runs have t = ∞ and never count.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import ParseError, TooFewSolversError

Array = NDArray[np.float64]

CONVERGED = "converged"
PLOT_COLUMNS = ["series", "tau", "rho"]
REFERENCE_SERIES = "tau=1"


class Metric(StrEnum):
    ITERATIONS = "iterations"
    TIME = "time"
    F_EVALS = "f_evals"

    @property
    def column(self) -> str:
        """Summary CSV column holding this metric."""
        return "iters" if self is Metric.ITERATIONS else self.value

    @property
    def floor(self) -> float:
        # Zero iterations or a sub-nanosecond run would otherwise divide by zero.
        return 1e-9 if self is Metric.TIME else 1.0


class FailurePolicy(StrEnum):
    INFINITE = "infinite"  # failures stay in the problem set with t = ∞
    DROP = "drop"  # problems no solver solved are removed


@dataclass(frozen=True)
class ProfileTable:
    """
    Profile of several solvers over a problem set.

    Attributes:
        solvers: Solver names, one column of `t` each
        problems: Problem names, one row of `t` each
        metric: Metric the table was built from
        t: Metric values (∞ for failures)
        ratios: π_{p,s}
        tau: Increasing τ grid, always containing 1
        rho: ρ_s(τ) with one row per solver
    """

    solvers: list[str]
    problems: list[str]
    metric: Metric
    t: Array
    ratios: Array
    tau: Array
    rho: Array = field(repr=False)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.rho, axis=1) < 0.0):
            raise ValueError("ρ must be nondecreasing in τ")

    def rho_at(self, solver: str, tau: float) -> float:
        """ρ_s(τ) evaluated exactly from the ratios, not read off the grid."""
        if not self.problems:
            return 0.0
        column = self.ratios[:, self.solvers.index(solver)]
        return float(np.mean(column <= tau))

    def solved_fraction(self, solver: str) -> float:
        """ρ_s(τ→∞)."""
        if not self.problems:
            return 0.0
        return float(np.mean(np.isfinite(self.t[:, self.solvers.index(solver)])))


def profile_ratios(t: Array) -> Array:
    """π_{p,s} for a problems × solvers matrix of metric values."""
    n_solvers = t.shape[1]
    ratios = np.empty_like(t)
    for s in range(n_solvers):
        others = np.delete(t, s, axis=1)
        best = others.min(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = t[:, s] / best
        # inf/inf is a failure; t/inf (every competitor failed) is a win.
        ratio[np.isinf(t[:, s])] = np.inf
        ratio[np.isfinite(t[:, s]) & np.isinf(best)] = 0.0
        ratios[:, s] = ratio
    return ratios


def tau_grid(ratios: Array, points: int = 200) -> Array:
    """Log-spaced τ grid from the smallest to the largest finite positive π, plus 1."""
    finite = ratios[np.isfinite(ratios) & (ratios > 0.0)]
    if finite.size == 0:
        return np.array([1.0])
    low, high = min(float(finite.min()), 1.0), max(float(finite.max()), 1.0)
    grid = np.geomspace(low, high, max(points, 2)) if high > low else np.array([low])
    # geomspace endpoints can be off by an ulp
    grid[0], grid[-1] = low, high
    return np.unique(np.concatenate([grid, [1.0]]))


def metric_matrix(rows: pd.DataFrame, metric: Metric) -> tuple[list[str], list[str], Array]:
    """
    Pivot summary rows into a problems × solvers matrix.

    Runs that did not converge count as ∞; several seeds of one
    (problem, solver) pair are averaged, so one failed seed makes the mean ∞.
    """
    missing = {"problem", "solver", "status", metric.column} - set(rows.columns)
    if missing:
        raise ParseError(f"summary is missing columns: {sorted(missing)}")
    values = pd.to_numeric(rows[metric.column], errors="coerce").clip(lower=metric.floor)
    frame = pd.DataFrame(
        {
            "problem": rows["problem"].astype(str),
            "solver": rows["solver"].astype(str),
            "value": values.where(rows["status"] == CONVERGED, np.inf),
        }
    )
    frame["value"] = frame["value"].fillna(np.inf)
    solvers = list(dict.fromkeys(frame["solver"]))
    problems = list(dict.fromkeys(frame["problem"]))
    pivot = frame.pivot_table(
        index="problem", columns="solver", values="value", aggfunc="mean"
    ).reindex(index=problems, columns=solvers)
    # A solver never run on a problem counts as failed.
    return solvers, problems, pivot.fillna(np.inf).to_numpy(dtype=np.float64)


def performance_profile(
    rows: pd.DataFrame,
    metric: Metric | str = Metric.ITERATIONS,
    failure_policy: FailurePolicy | str = FailurePolicy.INFINITE,
    tau_points: int = 200,
) -> ProfileTable:
    """
    Build the extended performance profile of the solvers in `rows`.

    Args:
        rows: Summary rows with problem, solver, status and metric columns
        metric: iterations, time or f_evals
        failure_policy: What to do with problems no solver solved
        tau_points: Size of the log-spaced τ grid

    Raises:
        TooFewSolversError: If fewer than two solvers appear in `rows`
    """
    metric = Metric(metric)
    failure_policy = FailurePolicy(failure_policy)
    solvers, problems, t = metric_matrix(rows, metric)
    if len(solvers) < 2:
        raise TooFewSolversError(f"a profile needs at least two solvers, got {solvers}")

    if failure_policy is FailurePolicy.DROP:
        keep = np.isfinite(t).any(axis=1)
        if not keep.all():
            logger.info(f"📊 Dropping {int((~keep).sum())} problems no solver solved")
        problems = [p for p, k in zip(problems, keep, strict=True) if k]
        t = t[keep]

    ratios = profile_ratios(t)
    tau = tau_grid(ratios, tau_points)
    if problems:
        rho = np.array([[np.mean(ratios[:, s] <= x) for x in tau] for s in range(len(solvers))])
    else:
        rho = np.zeros((len(solvers), tau.size))
    return ProfileTable(solvers, problems, metric, t, ratios, tau, rho)


def emit_profile_plotdata(table: ProfileTable, path: str | Path | None = None) -> pd.DataFrame:
    """
    Long-format (series, tau, rho) data: one series per solver plus a
    ``tau=1`` reference series spanning ρ ∈ {0, 1}.

    An empty problem set yields the header only. Written to `path` as CSV
    when given.
    """
    frames = []
    if table.problems:
        for s, solver in enumerate(table.solvers):
            frames.append(pd.DataFrame({"series": solver, "tau": table.tau, "rho": table.rho[s]}))
        frames.append(
            pd.DataFrame({"series": REFERENCE_SERIES, "tau": [1.0, 1.0], "rho": [0.0, 1.0]})
        )
    data = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=PLOT_COLUMNS)
    if path is not None:
        data.to_csv(path, index=False)
        logger.info(f"📝 Wrote {table.metric} profile to {path}")
    return data
