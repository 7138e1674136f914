"""Small dense linear-algebra kernels for compact quasi-Newton representations.

All matrices are NumPy float64 arrays in C (row-major) order. The orders
handled here are m or 2m with m the memory size, so every routine may use
O(m³) dense factorizations.
"""

import warnings

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray
from structqn_core.errors import (
    DimensionMismatchError,
    SingularMiddleMatrixError,
    SingularTriangularError,
)

Array = NDArray[np.float64]

SINGULAR_RTOL = 1e-14
SYMMETRY_RTOL = 1e-12


def inf_norm(a: Array) -> float:
    """Matrix ∞-norm (max absolute row sum); vector max-abs for 1-D input."""
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    return float(np.max(np.sum(np.abs(a), axis=1)))


def as_symmetric(a: Array) -> Array:
    """
    Validate and symmetrize a square matrix.

    Raises:
        DimensionMismatchError: If `a` is not square or is visibly non-symmetric
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_RTOL * max(1.0, inf_norm(a)):
        raise DimensionMismatchError("matrix tagged symmetric is not symmetric")
    return 0.5 * (a + a.T)


def split_triangular(p: Array) -> tuple[Array, Array, Array]:
    """
    Split a square matrix into strictly-lower, upper and diagonal parts.

    Returns:
        (L, R, d) with p = L + R, L strictly lower, R upper, d = diag(p)
    """
    return np.tril(p, -1), np.triu(p), np.diag(p).copy()


def tri_solve_upper(r: Array, b: Array, transpose: bool = False, tol: float | None = None) -> Array:
    """
    Solve R·x = b (or Rᵀ·x = b) with R upper triangular.

    Args:
        r: Upper triangular matrix of order m
        b: Right-hand side, shape (m,) or (m, k)
        transpose: Solve with Rᵀ instead of R
        tol: Singularity threshold on |R_ii| (default 1e-14·‖R‖∞)

    Returns:
        Solution with the shape of `b`

    Raises:
        SingularTriangularError: If a diagonal entry is at or below `tol`
        DimensionMismatchError: If shapes disagree
    """
    m = r.shape[0]
    if r.shape != (m, m) or b.shape[0] != m:
        raise DimensionMismatchError(f"R is {r.shape}, b is {b.shape}")
    if m == 0:
        return b.copy()
    threshold = SINGULAR_RTOL * inf_norm(r) if tol is None else tol
    diag = np.abs(np.diag(r))
    if np.any(diag <= threshold):
        i = int(np.argmin(diag))
        raise SingularTriangularError(f"|R[{i},{i}]| = {diag[i]:.3e} is below {threshold:.3e}")
    return sla.solve_triangular(r, b, trans="T" if transpose else "N", lower=False)


def sym_solve(a: Array, b: Array) -> Array:
    """
    Solve A·X = B for a symmetric, possibly indefinite A.

    Uses LU with partial pivoting; the compact middle matrices contain a −D
    block and are indefinite by construction.

    Raises:
        SingularMiddleMatrixError: If A is numerically singular
    """
    a = as_symmetric(a)
    p = a.shape[0]
    if b.shape[0] != p:
        raise DimensionMismatchError(f"A is {a.shape}, B is {b.shape}")
    if p == 0:
        return b.copy()
    scale = inf_norm(a)
    if scale == 0.0:
        raise SingularMiddleMatrixError("middle matrix is zero")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots <= SINGULAR_RTOL * scale):
        raise SingularMiddleMatrixError(
            f"middle matrix is singular (smallest pivot {pivots.min():.3e})"
        )
    return sla.lu_solve((lu, piv), b)


def is_positive_definite(a: Array, pd_tol: float = 0.0) -> bool:
    """
    Cholesky-based positive-definiteness test.

    With pd_tol=0 the answer is True exactly when the factorization succeeds
    numerically; a positive pd_tol additionally requires every squared pivot
    L_ii² to exceed it.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape[0] == 0:
        return True
    try:
        factor = np.linalg.cholesky(0.5 * (a + a.T))
    except np.linalg.LinAlgError:
        return False
    pivots = np.diag(factor) ** 2
    return bool(np.all(np.isfinite(pivots)) and np.all(pivots > pd_tol))


def symmetric_block(a11: Array, a12: Array, a22: Array) -> Array:
    """Assemble [[A11, A12], [A12ᵀ, A22]]."""
    return np.block([[a11, a12], [a12.T, a22]])


def negative_inertia(a: Array, rtol: float = 1e-12) -> tuple[int, int]:
    """
    Count negative and (numerically) zero eigenvalues of a small symmetric matrix.

    Returns:
        (negatives, zeros)
    """
    if a.shape[0] == 0:
        return 0, 0
    eig = np.linalg.eigvalsh(0.5 * (a + a.T))
    cutoff = rtol * max(1.0, float(np.max(np.abs(eig))))
    return int(np.sum(eig < -cutoff)), int(np.sum(np.abs(eig) <= cutoff))
