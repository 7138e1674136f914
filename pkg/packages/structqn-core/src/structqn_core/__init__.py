"""structqn core - Domain types shared by solvers, problems and the benchmark harness."""

__version__ = "0.1.0"

from structqn_core.errors import ConfigError, StructQnError
from structqn_core.operators import (
    DenseOp,
    DiagonalOp,
    KnownHessianOp,
    LowRankShiftOp,
    ScaledIdentityOp,
    SparseOp,
)
from structqn_core.problem import ProblemMetadata, StructuredProblem

__all__ = [
    "ConfigError",
    "DenseOp",
    "DiagonalOp",
    "KnownHessianOp",
    "LowRankShiftOp",
    "ProblemMetadata",
    "ScaledIdentityOp",
    "SparseOp",
    "StructQnError",
    "StructuredProblem",
]
