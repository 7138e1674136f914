"""Compact structured BFGS-Plus representation and its SMW-based solves.

    Aᴾ = σI − [Q U] · M⁻¹ · [Qᵀ; Uᵀ],   Q = V + σS,
    M  = [[Dⱽ + Lⱽ + Lⱽᵀ + σSᵀS, Lᵁ], [Lᵁᵀ, −Dᵁ]]

Search directions solve (K + Aᴾ + δI)p = −g through the Sherman–Morrison–Woodbury
identity with K̂₀ = K + (σ + δ)I and Ξ = [Q U]:

    (K̂₀ − ΞM⁻¹Ξᵀ)⁻¹ = K̂₀⁻¹ + K̂₀⁻¹Ξ (M − ΞᵀK̂₀⁻¹Ξ)⁻¹ ΞᵀK̂₀⁻¹
"""

import numpy as np
import scipy.linalg as sla
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import (
    InitNotPDError,
    RegularizationFailedError,
    SingularMiddleMatrixError,
)
from structqn_core.models.config import DeltaMode
from structqn_core.operators import KnownHessianOp

from structqn_solvers.dense_kernels import (
    is_positive_definite,
    negative_inertia,
    sym_solve,
    symmetric_block,
)
from structqn_solvers.qn_history import QnHistory, col_update

Array = NDArray[np.float64]


class PlusState:
    """
    Compact S-BFGS-P factors at one iterate.

    Attributes:
        history: Pair store with V tracked
        sigma: A₀ = σI
        K: Known Hessian at the current iterate
        delta: Active identity shift (0 unless regularization was needed)
        dense_cap: Largest n for the dense positive-definiteness fallback
    """

    def __init__(
        self,
        history: QnHistory,
        sigma: float,
        K: KnownHessianOp,
        delta: float = 0.0,
        dense_cap: int = 500,
    ):
        if not history.track_v:
            raise ValueError("the Plus representation needs a history that tracks V")
        self.history = history
        self.sigma = float(sigma)
        self.K = K
        self.delta = float(delta)
        self.dense_cap = dense_cap
        self._q: Array | None = None
        self._q_key: tuple[int, float] | None = None

    def refresh(self, sigma: float, K: KnownHessianOp) -> "PlusState":
        """Move the state to a new iterate; Q is kept when σ is unchanged."""
        self.sigma = float(sigma)
        self.K = K
        self.delta = 0.0
        return self

    @property
    def Q(self) -> Array:
        h = self.history
        key = (h.version, self.sigma)
        if self._q is not None and self._q_key == key:
            return self._q
        assert h.V is not None
        if self._q is not None and h.appended and self._q_key == (h.version - 1, self.sigma):
            self._q = col_update(self._q, h.V[:, -1] + self.sigma * h.S[:, -1], h.m)
        else:
            self._q = h.V + self.sigma * h.S
        self._q_key = key
        return self._q

    def middle(self) -> Array:
        h = self.history
        assert h.stv_l is not None and h.d_v is not None
        top_left = h.d_v + h.stv_l + h.stv_l.T + self.sigma * h.sts
        return symmetric_block(top_left, h.stu_l, -h.d_u)

    def xi(self) -> Array:
        """Ξ = [Q U]."""
        return np.hstack([self.Q, self.history.U])

    @property
    def shift(self) -> float:
        return self.sigma + self.delta


def apply_A_plus(st: PlusState, x: Array) -> Array:
    """
    Return Aᴾ·x.

    Raises:
        SingularMiddleMatrixError: If M is singular
    """
    if st.history.j == 0:
        return st.sigma * x
    xi = st.xi()
    return st.sigma * x - xi @ sym_solve(st.middle(), xi.T @ x)


def apply_plus_system(st: PlusState, x: Array) -> Array:
    """Return (K + Aᴾ + δI)·x."""
    return st.K.apply(x) + apply_A_plus(st, x) + st.delta * x


def dense_A_plus(st: PlusState) -> Array:
    """Materialize Aᴾ (tests and the small-n dense fallback)."""
    return apply_A_plus(st, np.eye(st.history.n))


def _schur(st: PlusState) -> tuple[Array, Array, Array]:
    xi = st.xi()
    xi_hat = st.K.solve_shifted(st.shift, xi)
    small = st.middle() - xi.T @ xi_hat
    return xi, xi_hat, 0.5 * (small + small.T)


def solve_plus(st: PlusState, g: Array) -> Array:
    """
    Return p = −(K + Aᴾ + δI)⁻¹g.

    Uses 2j+1 solves with K̂₀ and one dense solve of order 2j.

    Raises:
        InitNotPDError: If K̂₀ = K + (σ + δ)I is not positive definite
        SingularMiddleMatrixError: If the SMW capacitance matrix is singular
    """
    if not st.K.shifted_is_pd(st.shift):
        raise InitNotPDError(f"K + {st.shift:.3e}·I is not positive definite")
    h0g = st.K.solve_shifted(st.shift, g)
    if st.history.j == 0:
        return -h0g
    xi, xi_hat, small = _schur(st)
    w = sym_solve(small, xi.T @ h0g)
    return -(h0g + xi_hat @ w)


def solve_plus_dense(st: PlusState, g: Array) -> Array:
    """
    Return p = −(K + Aᴾ + δI)⁻¹g from the densified system.

    Used when K̂₀ itself is indefinite but the full system is positive definite,
    which the SMW path cannot handle. Needs n ≤ dense_cap.
    """
    n = st.history.n
    if n > st.dense_cap:
        raise InitNotPDError(f"dense solve needs n ≤ {st.dense_cap}, got {n}")
    system = st.K.to_dense() + dense_A_plus(st) + st.delta * np.eye(n)
    return -sla.solve(0.5 * (system + system.T), g, assume_a="pos")


def pd_probe_plus(st: PlusState) -> bool:
    """
    Return True iff K + Aᴾ + δI is numerically positive definite.

    When K̂₀ is positive definite the answer follows from inertia: the target
    is positive definite exactly when M − ΞᵀK̂₀⁻¹Ξ is nonsingular with as
    many negative eigenvalues as M. Otherwise the matrix is densified when
    n ≤ dense_cap and factored directly.

    Raises:
        SingularMiddleMatrixError: If M is singular; no δ can repair that
    """
    h = st.history
    if h.j == 0:
        return st.K.shifted_is_pd(st.shift)
    middle = st.middle()
    neg_m, zero_m = negative_inertia(middle)
    if zero_m:
        raise SingularMiddleMatrixError(f"middle matrix has {zero_m} zero eigenvalue(s)")
    if st.K.shifted_is_pd(st.shift):
        _, _, small = _schur(st)
        neg_s, zero_s = negative_inertia(small)
        return zero_s == 0 and neg_s == neg_m
    if h.n <= st.dense_cap:
        xi = st.xi()
        correction = xi @ sym_solve(middle, xi.T)
        dense = st.K.to_dense() + st.shift * np.eye(h.n) - correction
        return is_positive_definite(dense)
    return False


def cheap_delta(st: PlusState, epsilon: float) -> float:
    """δ = max(0, (ε − (u + v)ᵀs) / ‖s‖²) from the newest pair."""
    h = st.history
    if h.j == 0:
        return 0.0
    assert h.V is not None
    s, u, v = h.S[:, -1], h.U[:, -1], h.V[:, -1]
    return max(0.0, (epsilon - float((u + v) @ s)) / float(s @ s))


def ensure_positive_definite(
    st: PlusState,
    mode: DeltaMode = DeltaMode.POWER_OF_TEN,
    cap: int = 12,
    epsilon: float = 1e-8,
) -> PlusState:
    """
    Set st.delta so that K + Aᴾ + δI is positive definite.

    δ stays 0 when no shift is needed. Otherwise the cheap formula is tried
    first (mode=cheap), then δ = 10ʲ for j = 0..cap.

    Raises:
        RegularizationFailedError: If no δ up to 10^cap works
        SingularMiddleMatrixError: If M is singular
    """
    st.delta = 0.0
    if pd_probe_plus(st):
        return st
    if mode == DeltaMode.CHEAP:
        st.delta = cheap_delta(st, epsilon)
        if st.delta > 0.0 and pd_probe_plus(st):
            logger.debug(f"⚠️ Regularized with cheap δ = {st.delta:.3e}")
            return st
    for exponent in range(cap + 1):
        st.delta = 10.0**exponent
        if pd_probe_plus(st):
            logger.debug(f"⚠️ Regularized with δ = {st.delta:.0e}")
            return st
    st.delta = 0.0
    raise RegularizationFailedError(f"no δ ≤ 1e{cap} makes K + Aᴾ + δI positive definite")
