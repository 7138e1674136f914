"""structqn problems - Structured test problems, LIBSVM ingestion and gradient checks."""

__version__ = "0.1.0"

from structqn_problems.gradcheck import fd_gradient_check
from structqn_problems.libsvm import LibsvmData, parse_libsvm, read_libsvm
from structqn_problems.logistic import LogisticProblem, make_logistic
from structqn_problems.poisson import PoissonControl, laplacian_2d, make_poisson_control
from structqn_problems.quadratic import StructuredQuadratic, make_structured_quadratic
from structqn_problems.quartic import StructuredQuartic, make_structured_quartic
from structqn_problems.registry import (
    GENERATORS,
    build_problem,
    parse_problem_spec,
    problem_from_spec,
)

__all__ = [
    "GENERATORS",
    "LibsvmData",
    "LogisticProblem",
    "PoissonControl",
    "StructuredQuadratic",
    "StructuredQuartic",
    "build_problem",
    "fd_gradient_check",
    "laplacian_2d",
    "make_logistic",
    "make_poisson_control",
    "make_structured_quadratic",
    "make_structured_quartic",
    "parse_libsvm",
    "problem_from_spec",
    "read_libsvm",
]
