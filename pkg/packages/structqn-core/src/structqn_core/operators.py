"""Known-Hessian operators K = ∇²k̂(x) with shifted solves and PD probes."""

from abc import ABC, abstractmethod
from collections import OrderedDict
from collections.abc import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from loguru import logger
from numpy.typing import NDArray

from structqn_core.errors import DimensionMismatchError, InitNotPDError

Array = NDArray[np.float64]

# Above this order the sparse PD probe switches from dense eigenvalues to ARPACK.
DENSE_PROBE_CAP = 500

# σ moves every iteration under init1..init4; older factorizations are dropped.
FACTOR_CACHE_SIZE = 2


class ShiftCache[T]:
    """Factorizations keyed by shift, keeping only the most recently used ones."""

    def __init__(self, size: int = FACTOR_CACHE_SIZE):
        self.size = size
        self._entries: OrderedDict[float, T] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, shift: float, build: Callable[[], T]) -> T:
        if shift in self._entries:
            self._entries.move_to_end(shift)
            return self._entries[shift]
        factor = build()
        self._entries[shift] = factor
        if len(self._entries) > self.size:
            self._entries.popitem(last=False)
        return factor


class KnownHessianOp(ABC):
    """
    Symmetric operator for the known Hessian part of a structured objective.

    `apply` and `solve_shifted` accept a vector of shape (n,) or a block of
    columns of shape (n, k) and return the same shape.

    Attributes:
        n: Dimension
        is_constant: True when K does not depend on the evaluation point
        cost_class: Multiplications per n for one apply or solve (l)
    """

    n: int
    is_constant: bool = False
    cost_class: int = 1

    @abstractmethod
    def apply(self, x: Array) -> Array:
        """Return K·x."""

    @abstractmethod
    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        """Return z with (K + σI)z = rhs."""

    @abstractmethod
    def shifted_is_pd(self, sigma: float) -> bool:
        """Return True iff K + σI is positive definite."""

    def to_dense(self) -> Array:
        """Materialize K as an n×n array (tests and small-n fallbacks only)."""
        return self.apply(np.eye(self.n))

    def _check_rows(self, x: Array) -> None:
        if x.shape[0] != self.n:
            raise DimensionMismatchError(f"expected {self.n} rows, got {x.shape[0]}")


class ScaledIdentityOp(KnownHessianOp):
    """K = cI, e.g. λI for ridge terms or I for ½‖x‖²."""

    is_constant = True
    cost_class = 1

    def __init__(self, n: int, scale: float = 1.0):
        self.n = n
        self.scale = float(scale)

    def apply(self, x: Array) -> Array:
        self._check_rows(x)
        return self.scale * x

    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        self._check_rows(rhs)
        shift = self.scale + sigma
        if shift == 0.0:
            raise InitNotPDError("K + σI is singular")
        return rhs / shift

    def shifted_is_pd(self, sigma: float) -> bool:
        return self.scale + sigma > 0.0


class DiagonalOp(KnownHessianOp):
    """K = diag(d)."""

    cost_class = 1

    def __init__(self, diagonal: Array, is_constant: bool = False):
        self.diagonal = np.asarray(diagonal, dtype=np.float64)
        self.n = self.diagonal.shape[0]
        self.is_constant = is_constant

    def _column(self, x: Array) -> Array:
        return self.diagonal if x.ndim == 1 else self.diagonal[:, None]

    def apply(self, x: Array) -> Array:
        self._check_rows(x)
        return self._column(x) * x

    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        self._check_rows(rhs)
        shifted = self.diagonal + sigma
        if np.any(shifted == 0.0):
            raise InitNotPDError("K + σI is singular")
        return rhs / (shifted if rhs.ndim == 1 else shifted[:, None])

    def shifted_is_pd(self, sigma: float) -> bool:
        return bool(np.all(self.diagonal + sigma > 0.0))

    def to_dense(self) -> Array:
        return np.diag(self.diagonal)


class LowRankShiftOp(KnownHessianOp):
    """
    K = φI + Q·diag(d)·Qᵀ with Q of orthonormal columns (n×r).

    Shifted solves use the Sherman–Morrison–Woodbury identity on the rank-r
    term, so one solve costs O(nr) after an r×r factorization per shift.
    """

    is_constant = True

    def __init__(self, phi: float, basis: Array, weights: Array):
        self.phi = float(phi)
        self.basis = np.asarray(basis, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.n, self.rank = self.basis.shape
        if self.weights.shape != (self.rank,):
            raise DimensionMismatchError(
                f"weights must have length {self.rank}, got {self.weights.shape}"
            )
        self.cost_class = max(1, self.rank)
        self._gram = self.basis.T @ self.basis
        self._factors: ShiftCache[tuple[Array, Array]] = ShiftCache()

    def apply(self, x: Array) -> Array:
        self._check_rows(x)
        coef = self.basis.T @ x
        coef = (self.weights * coef.T).T
        return self.phi * x + self.basis @ coef

    def _small_factor(self, c: float) -> tuple[Array, Array]:
        def build() -> tuple[Array, Array]:
            return sla.lu_factor(c * np.eye(self.rank) + self._gram * self.weights[None, :])

        return self._factors.get(c, build)

    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        # (cI + QDQᵀ)⁻¹ = (1/c)·(I − Q·D·(cI + QᵀQ·D)⁻¹·Qᵀ)
        self._check_rows(rhs)
        c = self.phi + sigma
        if c == 0.0:
            raise InitNotPDError("K + σI is singular on the complement of the basis")
        z = sla.lu_solve(self._small_factor(c), self.basis.T @ rhs)
        z = (self.weights * z.T).T
        return (rhs - self.basis @ z) / c

    def shifted_is_pd(self, sigma: float) -> bool:
        c = self.phi + sigma
        if self.rank < self.n and c <= 0.0:
            return False
        return bool(np.all(c + self.weights > 0.0))


class SparseOp(KnownHessianOp):
    """K given as a symmetric scipy.sparse matrix; shifted solves by sparse LU."""

    def __init__(self, matrix: sp.spmatrix | sp.sparray, is_constant: bool = True):
        self.matrix = sp.csr_matrix(matrix, dtype=np.float64)
        self.n = self.matrix.shape[0]
        self.is_constant = is_constant
        self.cost_class = max(1, self.matrix.nnz // max(1, self.n))
        self._factors: ShiftCache[spla.SuperLU] = ShiftCache()
        self._smallest: float | None = None

    def apply(self, x: Array) -> Array:
        self._check_rows(x)
        return np.asarray(self.matrix @ x)

    def _shifted(self, sigma: float) -> sp.csc_matrix:
        return (self.matrix + sigma * sp.identity(self.n, format="csr")).tocsc()

    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        self._check_rows(rhs)

        def build() -> spla.SuperLU:
            try:
                return spla.splu(self._shifted(sigma))
            except RuntimeError as e:
                raise InitNotPDError(f"K + σI is singular: {e}") from e

        return self._factors.get(sigma, build).solve(np.asarray(rhs, dtype=np.float64))

    def smallest_eigenvalue(self) -> float:
        """
        Smallest eigenvalue of K, dense below DENSE_PROBE_CAP and by ARPACK above.

        Raises:
            ArpackNoConvergence: If ARPACK does not converge
        """
        if self._smallest is None:
            if self.n <= DENSE_PROBE_CAP:
                self._smallest = float(np.linalg.eigvalsh(self.matrix.toarray())[0])
            else:
                self._smallest = float(
                    spla.eigsh(self.matrix, k=1, which="SA", return_eigenvectors=False)[0]
                )
        return self._smallest

    def _pivots_positive(self, sigma: float) -> bool:
        # symmetric ordering with diagonal pivots: U's diagonal holds the LDLᵀ pivots
        try:
            lu = spla.splu(
                self._shifted(sigma),
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError:
            return False
        return bool(np.all(lu.U.diagonal() > 0.0))

    def shifted_is_pd(self, sigma: float) -> bool:
        try:
            return self.smallest_eigenvalue() + sigma > 0.0
        except spla.ArpackNoConvergence:
            logger.warning(f"⚠️ ARPACK did not converge for n={self.n}; checking LU pivots")
            return self._pivots_positive(sigma)

    def to_dense(self) -> Array:
        return self.matrix.toarray()


class DenseOp(KnownHessianOp):
    """K given as a dense symmetric array; meant for small problems and oracles."""

    def __init__(self, matrix: Array, is_constant: bool = True):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.n = self.matrix.shape[0]
        self.is_constant = is_constant
        self.cost_class = self.n

    def apply(self, x: Array) -> Array:
        self._check_rows(x)
        return self.matrix @ x

    def solve_shifted(self, sigma: float, rhs: Array) -> Array:
        self._check_rows(rhs)
        try:
            return sla.solve(self.matrix + sigma * np.eye(self.n), rhs, assume_a="sym")
        except sla.LinAlgError as e:
            raise InitNotPDError(f"K + σI is singular: {e}") from e

    def shifted_is_pd(self, sigma: float) -> bool:
        try:
            np.linalg.cholesky(self.matrix + sigma * np.eye(self.n))
        except np.linalg.LinAlgError:
            return False
        return True

    def to_dense(self) -> Array:
        return self.matrix.copy()
