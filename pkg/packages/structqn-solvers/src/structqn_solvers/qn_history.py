"""Limited-memory pair storage with incrementally maintained small products.

Pairs are stored as columns, oldest first: ``S[:, i]`` is s_i. Every cached
product is maintained by the column and product updates below in O(mn) work
per new pair.
"""

from pathlib import Path

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_common.matrix_io import write_matrices
from structqn_core.errors import CurvatureRejectError, DimensionMismatchError

from structqn_solvers.dense_kernels import split_triangular

Array = NDArray[np.float64]


def col_update(M: Array, c: Array, m: int) -> Array:
    """
    Append column `c` to `M`, dropping the oldest column when `M` is full.

    Args:
        M: Matrix of shape (n, j) with j ≤ m
        c: New column of length n
        m: Memory limit

    Returns:
        [M c] if j < m, otherwise [M[:, 1:] c]

    Raises:
        DimensionMismatchError: If len(c) differs from the row count of M
    """
    n, j = M.shape
    if c.shape != (n,):
        raise DimensionMismatchError(f"column has shape {c.shape}, expected ({n},)")
    if j > m:
        raise DimensionMismatchError(f"matrix holds {j} columns, above memory {m}")
    kept = M if j < m else M[:, 1:]
    return np.column_stack([kept, c]) if kept.shape[1] else c[:, None].copy()


def prod_update(
    P: Array,
    A: Array | None,
    B: Array | None,
    a: Array | None,
    b: Array | None,
    m: int,
) -> Array:
    """
    Update a cached product P = AᵀB after appending a to A and b to B.

    None stands for an all-zero matrix or vector; products with it are skipped
    rather than formed. This gives diagonal (A=B=None) and triangular (one of
    A, B None) updates from the same routine.

    Args:
        P: Current product of shape (j, j)
        A: Current left factor (n, j) or None
        B: Current right factor (n, j) or None
        a: Column appended to A, or None
        b: Column appended to B, or None
        m: Memory limit

    Returns:
        [[core, Aᵀb], [aᵀB, aᵀb]] where core is P, or P without its first row
        and column when j = m (the factors then also lose their first column)
    """
    j = P.shape[0]
    if P.shape != (j, j):
        raise DimensionMismatchError(f"product must be square, got {P.shape}")
    for name, factor in (("A", A), ("B", B)):
        if factor is not None and factor.shape[1] != j:
            raise DimensionMismatchError(f"{name} has {factor.shape[1]} columns, product {j}")
    if a is not None and b is not None and a.shape != b.shape:
        raise DimensionMismatchError(f"new columns differ in shape: {a.shape} vs {b.shape}")
    full = j >= m
    core = P[1:, 1:] if full else P
    k = core.shape[0]
    A_kept = None if A is None else (A[:, 1:] if full else A)
    B_kept = None if B is None else (B[:, 1:] if full else B)

    out = np.zeros((k + 1, k + 1))
    out[:k, :k] = core
    if A_kept is not None and b is not None and k:
        out[:k, k] = A_kept.T @ b
    if B_kept is not None and a is not None and k:
        out[k, :k] = a @ B_kept
    if a is not None and b is not None:
        out[k, k] = a @ b
    return out


class QnHistory:
    """
    Store of the m most recent pairs (s_i, u_i[, v_i]) and their small products.

    Always maintained: S, U, Rᵁ (upper part of SᵀU), Dᵁ (its diagonal) and UᵀU.
    With `track_v` (Plus variant) also V, Lⱽ, Dⱽ, SᵀS and Lᵁ. Lᵁ and SᵀS are
    computed on demand from S and U when not tracked.

    Attributes:
        n: Dimension
        m: Memory limit
        pushes: Number of accepted pairs since creation
        version: Bumped on every change; caches built from the history compare it
        appended: True when the latest change was a single push_pair
        multiplications: Scalar multiplications spent in product updates
    """

    def __init__(self, n: int, m: int, track_v: bool = False, curvature_rtol: float = 1e-12):
        if m < 1:
            raise ValueError(f"memory must be at least 1, got {m}")
        self.n = n
        self.m = m
        self.track_v = track_v
        self.curvature_rtol = curvature_rtol
        self.pushes = 0
        self.version = 0
        self.appended = False
        self.multiplications = 0

        self.S = np.zeros((n, 0))
        self.U = np.zeros((n, 0))
        self.stu_r = np.zeros((0, 0))
        self.d_u = np.zeros((0, 0))
        self.utu = np.zeros((0, 0))
        self.V: Array | None = np.zeros((n, 0)) if track_v else None
        self.stv_l: Array | None = np.zeros((0, 0)) if track_v else None
        self.d_v: Array | None = np.zeros((0, 0)) if track_v else None
        self._sts: Array | None = np.zeros((0, 0)) if track_v else None
        self._stu_l: Array | None = np.zeros((0, 0)) if track_v else None

    @property
    def j(self) -> int:
        """Current number of stored pairs."""
        return self.S.shape[1]

    def __len__(self) -> int:
        return self.j

    @property
    def sts(self) -> Array:
        return self._sts if self._sts is not None else self.S.T @ self.S

    @property
    def stu_l(self) -> Array:
        if self._stu_l is not None:
            return self._stu_l
        return split_triangular(self.S.T @ self.U)[0]

    @property
    def d_u_diag(self) -> Array:
        return np.diag(self.d_u).copy()

    def curvature_tol(self, s: Array, u: Array) -> float:
        return self.curvature_rtol * float(np.linalg.norm(s) * np.linalg.norm(u))

    def push_pair(self, s: Array, u: Array, v: Array | None = None) -> "QnHistory":
        """
        Insert a new pair, evicting the oldest one when the store is full.

        Args:
            s: Step x₊ − x
            u: Structured gradient difference K₊s + ∇û₊ − ∇û
            v: K₊s; required when the history tracks V

        Returns:
            self, updated in place

        Raises:
            CurvatureRejectError: If sᵀu ≤ curvature tolerance; nothing is changed
            DimensionMismatchError: If vector lengths differ from n
        """
        for name, vec in (("s", s), ("u", u), ("v", v)):
            if vec is not None and vec.shape != (self.n,):
                raise DimensionMismatchError(f"{name} has shape {vec.shape}, expected ({self.n},)")
        if self.track_v and v is None:
            raise DimensionMismatchError("this history tracks V; v is required")
        s_dot_u = float(s @ u)
        tol = self.curvature_tol(s, u)
        if not s_dot_u > tol:
            raise CurvatureRejectError(f"sᵀu = {s_dot_u:.3e} is not above {tol:.3e}")

        m, S, U = self.m, self.S, self.U
        j = self.j
        self.stu_r = prod_update(self.stu_r, S, None, s, u, m)
        self.d_u = prod_update(self.d_u, None, None, s, u, m)
        self.utu = prod_update(self.utu, U, U, u, u, m)
        self.multiplications += 3 * self.n * (j + 1)
        if self.track_v and v is not None:
            V = self.V
            self._stu_l = prod_update(self.stu_l, None, U, s, None, m)
            self._sts = prod_update(self.sts, S, S, s, s, m)
            self.stv_l = prod_update(self.stv_l, None, V, s, None, m)
            self.d_v = prod_update(self.d_v, None, None, s, v, m)
            self.V = col_update(V, v, m)
            self.multiplications += 3 * self.n * (j + 1)
        self.S = col_update(S, s, m)
        self.U = col_update(U, u, m)
        self.pushes += 1
        self.version += 1
        self.appended = True
        logger.debug(f"🔍 Stored pair {self.pushes} (j={self.j}, sᵀu={s_dot_u:.3e})")
        return self

    def drop_oldest(self) -> "QnHistory":
        """Remove the oldest pair, e.g. after its products made a middle matrix singular."""
        if self.j == 0:
            return self
        self.S, self.U = self.S[:, 1:], self.U[:, 1:]
        self.stu_r, self.d_u, self.utu = self.stu_r[1:, 1:], self.d_u[1:, 1:], self.utu[1:, 1:]
        if self.track_v:
            assert self.V is not None and self.stv_l is not None and self.d_v is not None
            self.V = self.V[:, 1:]
            self.stv_l, self.d_v = self.stv_l[1:, 1:], self.d_v[1:, 1:]
            self._sts = self.sts[1:, 1:]
            self._stu_l = self.stu_l[1:, 1:]
        self.version += 1
        self.appended = False
        logger.warning(f"⚠️ Dropped oldest pair (j={self.j})")
        return self

    def stu(self) -> Array:
        """SᵀU reassembled from its cached split."""
        return self.stu_l + self.stu_r

    def dump(self, path: str | Path) -> None:
        """Write every stored matrix in the plain-text matrix format."""
        matrices = {"S": self.S, "U": self.U, "STU_R": self.stu_r, "D_U": self.d_u, "UTU": self.utu}
        if self.track_v:
            matrices |= {
                "V": self.V,
                "STU_L": self.stu_l,
                "STV_L": self.stv_l,
                "D_V": self.d_v,
                "STS": self.sts,
            }
        write_matrices(path, matrices)
        logger.debug(f"📝 Wrote history dump to {path}")
