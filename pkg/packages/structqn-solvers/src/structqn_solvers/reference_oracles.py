"""Dense full-memory quasi-Newton updates used as reference oracles.

These are O(n²) per update and O(n³) per solve, so they are limited to
n ≤ MAX_ORACLE_N. The compact representations are checked against them, and
`minimize_full_memory` runs the same line-search loop as `minimize` with the
dense recursions in place of the limited-memory forms.
"""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.linalg as sla
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import (
    CurvatureViolationError,
    DegenerateCurvatureError,
    RegularizationFailedError,
)
from structqn_core.models.config import Variant, WolfeConfig
from structqn_core.problem import StructuredProblem

from structqn_solvers.dense_kernels import (
    as_symmetric,
    inf_norm,
    is_positive_definite,
    split_triangular,
    sym_solve,
    symmetric_block,
)
from structqn_solvers.line_search import CurvatureFn, strong_wolfe_structured

Array = NDArray[np.float64]

MAX_ORACLE_N = 200


class OracleKind(StrEnum):
    BFGS = "bfgs"
    SBFGS_MINUS = "sbfgs-minus"
    SBFGS_PLUS = "sbfgs-plus"


@dataclass(frozen=True)
class DenseQnMatrix:
    """
    A dense quasi-Newton matrix.

    For the bfgs kind `B` approximates the full Hessian; for the structured
    kinds it holds A ≈ ∇²û only, and the known part K is added by the caller.
    """

    B: Array
    kind: OracleKind = OracleKind.BFGS

    def __post_init__(self) -> None:
        assert self.B.shape[0] <= MAX_ORACLE_N, f"oracles are limited to n ≤ {MAX_ORACLE_N}"

    @property
    def n(self) -> int:
        return self.B.shape[0]


def _rank_two(B: Array, b_s: Array, s: Array, y: Array) -> Array:
    """B − (Bs)(Bs)ᵀ/(sᵀBs) + yyᵀ/(sᵀy) with the checks shared by every update."""
    s_dot_y = float(s @ y)
    if not s_dot_y > 0.0:
        raise CurvatureViolationError(f"sᵀy = {s_dot_y:.3e} is not positive")
    s_b_s = float(s @ b_s)
    if s_b_s == 0.0:
        raise DegenerateCurvatureError("sᵀBs vanishes")
    return as_symmetric(B - np.outer(b_s, b_s) / s_b_s + np.outer(y, y) / s_dot_y)


def bfgs_update(B: DenseQnMatrix, s: Array, y: Array) -> DenseQnMatrix:
    """
    Recursive BFGS: B₊ = B − Bssᵀ B/(sᵀBs) + yyᵀ/(sᵀy).

    Raises:
        CurvatureViolationError: If sᵀy ≤ 0
        DegenerateCurvatureError: If sᵀBs = 0
    """
    b_s = B.B @ s
    if not float(s @ b_s) > 0.0:
        raise DegenerateCurvatureError(f"sᵀBs = {float(s @ b_s):.3e} is not positive")
    return DenseQnMatrix(_rank_two(B.B, b_s, s, y), OracleKind.BFGS)


def compact_bfgs_dense(B0: DenseQnMatrix, S: Array, Y: Array) -> DenseQnMatrix:
    """
    Compact BFGS: B = B₀ − [B₀S Y]·[[SᵀB₀S, L], [Lᵀ, −D]]⁻¹·[SᵀB₀; Yᵀ],
    with SᵀY = L + D + R split into strictly lower, diagonal and upper parts.

    Raises:
        CurvatureViolationError: If some sᵢᵀyᵢ ≤ 0
        SingularMiddleMatrixError: If the middle matrix is singular
    """
    if S.shape[1] == 0:
        return B0
    L, _, d = split_triangular(S.T @ Y)
    if np.any(d <= 0.0):
        raise CurvatureViolationError("every pair needs sᵢᵀyᵢ > 0")
    b0s = B0.B @ S
    middle = symmetric_block(as_symmetric(S.T @ b0s), L, -np.diag(d))
    factor = np.hstack([b0s, Y])
    return DenseQnMatrix(as_symmetric(B0.B - factor @ sym_solve(middle, factor.T)), B0.kind)


def sbfgs_minus_update(
    A: DenseQnMatrix, K_now: Array, K_next: Array, s: Array, u: Array
) -> DenseQnMatrix:
    """
    Structured BFGS-Minus: with Bᴹ = A + K,
    A₊ = Bᴹ − K₊ − Bᴹssᵀ Bᴹ/(sᵀBᴹs) + uuᵀ/(sᵀu).

    Raises:
        CurvatureViolationError: If sᵀu ≤ 0
        DegenerateCurvatureError: If sᵀBᴹs = 0
    """
    b_m = A.B + K_now
    b_next = _rank_two(b_m, b_m @ s, s, u)
    return DenseQnMatrix(as_symmetric(b_next - K_next), OracleKind.SBFGS_MINUS)


def sbfgs_plus_update(A: DenseQnMatrix, K_next: Array, s: Array, u: Array) -> DenseQnMatrix:
    """
    Structured BFGS-Plus: with B̂ = A + K₊,
    A₊ = A − B̂ssᵀB̂/(sᵀB̂s) + uuᵀ/(sᵀu).

    A₊ may be indefinite when K₊ is.

    Raises:
        CurvatureViolationError: If sᵀu ≤ 0
        DegenerateCurvatureError: If sᵀB̂s = 0
    """
    b_hat_s = A.B @ s + K_next @ s
    return DenseQnMatrix(_rank_two(A.B, b_hat_s, s, u), OracleKind.SBFGS_PLUS)


def _regularized_solve(system: Array, g: Array, cap: int) -> Array:
    for delta in [0.0, *(10.0**j for j in range(cap + 1))]:
        shifted = system + delta * np.eye(system.shape[0])
        if is_positive_definite(shifted):
            return -sla.solve(shifted, g, assume_a="pos")
    raise RegularizationFailedError(f"no δ ≤ 1e{cap} makes the dense system positive definite")


def _oracle_curvature(
    problem: StructuredProblem, variant: Variant, g: Array, g_u: Array
) -> CurvatureFn:
    def curvature(x_new: Array, s: Array, g_new: Array, g_u_new: Array) -> Array:
        if variant == Variant.LBFGS:
            return g_new - g
        return problem.known_hessian(x_new).apply(s) + (g_u_new - g_u)

    return curvature


def minimize_full_memory(
    problem: StructuredProblem,
    x0: Array,
    variant: Variant = Variant.PLUS,
    sigma: float = 1.0,
    wolfe: WolfeConfig | None = None,
    epsilon: float = 1e-6,
    max_iters: int = 100,
    delta_cap: int = 12,
) -> list[Array]:
    """
    Full-memory counterpart of `minimize` with a constant σ.

    Minus starts from B₀ᴹ = σI, Plus from A₀ᴾ = σI with δ chosen as the first
    of 0, 10⁰, 10¹, ... making K + Aᴾ + δI positive definite, and lbfgs runs
    plain BFGS on y = g₊ − g from B₀ = σI.

    Returns:
        The iterates x₀, x₁, ... up to convergence, max_iters, or the first
        failed line search
    """
    n = problem.n
    assert n <= MAX_ORACLE_N, f"oracles are limited to n ≤ {MAX_ORACLE_N}"
    x = np.array(x0, dtype=np.float64)
    f = problem.eval_f(x)
    g_u = problem.eval_grad_u(x)
    g = problem.eval_grad_k(x) + g_u
    K = problem.known_hessian(x).to_dense()
    match variant:
        case Variant.MINUS:
            A = DenseQnMatrix(sigma * np.eye(n) - K, OracleKind.SBFGS_MINUS)
        case Variant.PLUS:
            A = DenseQnMatrix(sigma * np.eye(n), OracleKind.SBFGS_PLUS)
        case Variant.LBFGS:
            A = DenseQnMatrix(sigma * np.eye(n), OracleKind.BFGS)
    iterates = [x.copy()]

    for k in range(max_iters):
        if inf_norm(g) <= epsilon:
            break
        if variant == Variant.LBFGS:
            p = -sla.solve(A.B, g, assume_a="pos")
        else:
            p = _regularized_solve(A.B + K, g, delta_cap)
        curvature = _oracle_curvature(problem, variant, g, g_u)
        step = strong_wolfe_structured(problem, x, p, f, g, curvature, wolfe)
        if not step.converged or step.u is None:
            logger.warning(f"⚠️ Full-memory line search ended with {step.status} at k={k}")
            break
        K_next = problem.known_hessian(step.x_new).to_dense()
        match variant:
            case Variant.MINUS:
                A = sbfgs_minus_update(A, K, K_next, step.s, step.u)
            case Variant.PLUS:
                A = sbfgs_plus_update(A, K_next, step.s, step.u)
            case Variant.LBFGS:
                A = bfgs_update(A, step.s, step.u)
        x, f, g, g_u, K = step.x_new, step.f_new, step.g_new, step.g_u_new, K_next
        iterates.append(x.copy())
    return iterates
