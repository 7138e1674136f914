"""Exception hierarchy shared by all structqn packages."""


class StructQnError(Exception):
    """Base class for every error raised by structqn."""


class DimensionMismatchError(StructQnError, ValueError):
    """Raised when vector or matrix shapes do not fit together."""


class SingularTriangularError(StructQnError):
    """Raised when a triangular factor has a (numerically) zero diagonal entry.

    In a quasi-Newton history this means a pair with sᵀu ≈ 0 reached the store.
    """


class SingularMiddleMatrixError(StructQnError):
    """Raised when the small middle matrix of a compact form cannot be factored."""


class CurvatureRejectError(StructQnError):
    """Raised when a pair fails the curvature test sᵀu > tol and is not stored."""


class InitNotPDError(StructQnError):
    """Raised when an initial matrix that must be positive definite is not."""


class RegularizationFailedError(StructQnError):
    """Raised when no identity shift up to the cap makes the system positive definite."""


class NotDescentError(StructQnError):
    """Raised when a line search is started along a non-descent direction."""


class MaxEvalsError(StructQnError):
    """Raised when a line search exhausts its function-evaluation budget."""


class LineSearchStalledError(StructQnError):
    """Raised when a line search's bracket collapses before the conditions hold."""


class CurvatureViolationError(StructQnError):
    """Raised by dense reference updates when sᵀy ≤ 0."""


class DegenerateCurvatureError(StructQnError):
    """Raised by dense reference updates when sᵀBs vanishes."""


class BadRankError(StructQnError, ValueError):
    """Raised when a requested low-rank term is larger than the dimension."""


class ParseError(StructQnError):
    """Raised on malformed input files.

    Args:
        message: Human-readable description
        line_number: 1-based line number of the offending line, if known
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class EmptyDatasetError(StructQnError):
    """Raised when a data file holds no samples."""


class ConfigError(StructQnError):
    """Raised on invalid configuration.

    Args:
        message: Human-readable description
        field_path: Dotted path of the offending field (e.g. ``solvers.0.memory``)
    """

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        prefix = f"{field_path}: " if field_path else ""
        super().__init__(f"{prefix}{message}")


class TooFewSolversError(StructQnError):
    """Raised when a performance profile is requested for fewer than two solvers."""
