"""Run reports: per-iteration trace and termination status."""

from enum import StrEnum

import numpy as np
from pydantic import BaseModel, Field


class RunStatus(StrEnum):
    CONVERGED = "converged"
    MAX_ITERS = "max-iters"
    LINE_SEARCH_FAILURE = "line-search-failure"
    REGULARIZATION_FAILURE = "regularization-failure"


class TraceRecord(BaseModel):
    """
    State at iterate k.

    `alpha`, `delta` and `s_dot_u` describe the step that produced x_k and are
    None at k=0. `sigma` is the σ in force when the direction at x_k is computed.
    """

    k: int
    f: float
    gnorm_inf: float
    alpha: float | None = None
    sigma: float
    delta: float | None = None
    s_dot_u: float | None = None


class RunReport(BaseModel):
    """Outcome of one minimize call."""

    status: RunStatus
    iterations: int = 0
    f_evals: int = 0
    g_evals: int = 0
    final_f: float
    final_gnorm_inf: float
    wall_time: float = 0.0
    rejected_pairs: int = 0
    fallback_steps: int = 0
    trace: list[TraceRecord] = Field(default_factory=list)
    x_final: list[float] = Field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == RunStatus.CONVERGED

    def mean_sigma(self) -> float:
        """Average σₖ over all recorded iterates."""
        if not self.trace:
            return float("nan")
        return float(np.mean([record.sigma for record in self.trace]))
