"""structqn solvers - Compact structured BFGS representations and line-search drivers."""

__version__ = "0.1.0"

from structqn_solvers.initializations import probe_sigma_bar, sigma_next
from structqn_solvers.line_search import LineSearchStatus, StepResult, strong_wolfe_structured
from structqn_solvers.qn_history import QnHistory, col_update, prod_update
from structqn_solvers.sbfgs_minus import (
    MinusState,
    OperatorInit,
    ScalarInit,
    apply_B_minus,
    apply_H_minus,
    search_direction_general,
    search_direction_scalar,
)
from structqn_solvers.sbfgs_plus import (
    PlusState,
    apply_A_plus,
    ensure_positive_definite,
    pd_probe_plus,
    solve_plus,
)
from structqn_solvers.solver import minimize

__all__ = [
    "LineSearchStatus",
    "MinusState",
    "OperatorInit",
    "PlusState",
    "QnHistory",
    "ScalarInit",
    "StepResult",
    "apply_A_plus",
    "apply_B_minus",
    "apply_H_minus",
    "col_update",
    "ensure_positive_definite",
    "minimize",
    "pd_probe_plus",
    "probe_sigma_bar",
    "prod_update",
    "search_direction_general",
    "search_direction_scalar",
    "sigma_next",
    "solve_plus",
    "strong_wolfe_structured",
]
