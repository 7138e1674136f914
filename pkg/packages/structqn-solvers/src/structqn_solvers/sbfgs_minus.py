"""Compact structured BFGS-Minus representation and its inverse.

With Rᵁ, Lᵁ, Dᵁ the upper, strictly-lower and diagonal parts of SᵀU and
T = (Rᵁ)⁻¹ (never formed, only solved with):

    B = B₀ − [B₀S U] · [[SᵀB₀S, Lᵁ], [Lᵁᵀ, −Dᵁ]]⁻¹ · [SᵀB₀; Uᵀ]
    H = H₀ + [S H₀U] · [[Tᵀ(Dᵁ + UᵀH₀U)T, −Tᵀ], [−T, 0]] · [Sᵀ; UᵀH₀]

where B = K + Aᴹ is the full Hessian approximation and H = B⁻¹.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import InitNotPDError
from structqn_core.operators import KnownHessianOp

from structqn_solvers.dense_kernels import sym_solve, symmetric_block, tri_solve_upper
from structqn_solvers.qn_history import QnHistory, col_update

Array = NDArray[np.float64]


@dataclass(frozen=True)
class ScalarInit:
    """B₀ = σI."""

    sigma: float


@dataclass(frozen=True)
class OperatorInit:
    """
    B₀ = σ̄I + K₀ applied through a known-Hessian operator.

    Attributes:
        k0: Known Hessian at the starting point
        sigma_bar: Identity shift
        constant: σ̄ is fixed for the whole run, so (σ̄I + K₀)⁻¹U is updated
            one column at a time instead of recomputed
    """

    k0: KnownHessianOp
    sigma_bar: float
    constant: bool = True


class MinusState:
    """
    Compact S-BFGS-M factors for one solver run.

    The state reads the history it was created with; products that depend on
    the initialization (H₀U and UᵀH₀U) are cached and refreshed lazily when
    the history or σ changes.
    """

    def __init__(self, history: QnHistory, init: ScalarInit | OperatorInit):
        self.history = history
        self.solves = 0
        self._h0u: Array | None = None
        self._uth0u: Array | None = None
        self._cached_version = -1
        self.init = init
        self._validate_init(init)

    @staticmethod
    def _validate_init(init: ScalarInit | OperatorInit) -> None:
        if isinstance(init, ScalarInit):
            if not init.sigma > 0.0:
                raise InitNotPDError(f"scalar initialization needs σ > 0, got {init.sigma}")
        elif not init.k0.shifted_is_pd(init.sigma_bar):
            raise InitNotPDError(f"σ̄I + K₀ is not positive definite for σ̄ = {init.sigma_bar}")

    def set_sigma(self, sigma: float) -> None:
        """Switch to a new σ, dropping every σ-dependent cache."""
        if isinstance(self.init, ScalarInit):
            new_init: ScalarInit | OperatorInit = ScalarInit(sigma)
        else:
            new_init = OperatorInit(self.init.k0, sigma, self.init.constant)
        self._validate_init(new_init)
        if new_init != self.init:
            self.init = new_init
            self._h0u = self._uth0u = None
            self._cached_version = -1

    def b0(self, x: Array) -> Array:
        if isinstance(self.init, ScalarInit):
            return self.init.sigma * x
        return self.init.sigma_bar * x + self.init.k0.apply(x)

    def h0(self, x: Array) -> Array:
        if isinstance(self.init, ScalarInit):
            return x / self.init.sigma
        self.solves += 1 if x.ndim == 1 else x.shape[1]
        return self.init.k0.solve_shifted(self.init.sigma_bar, x)

    def h0u(self) -> tuple[Array, Array]:
        """Return (H₀U, UᵀH₀U) for the current history."""
        h = self.history
        if self._cached_version == h.version and self._h0u is not None and self._uth0u is not None:
            return self._h0u, self._uth0u
        if h.j == 0:
            self._h0u, self._uth0u = np.zeros((h.n, 0)), np.zeros((0, 0))
        elif isinstance(self.init, ScalarInit):
            self._h0u = h.U / self.init.sigma
            self._uth0u = h.utu / self.init.sigma
        elif (
            self.init.constant
            and self._h0u is not None
            and self._uth0u is not None
            and h.appended
            and h.version == self._cached_version + 1
        ):
            self._append_h0u()
        else:
            self._h0u = self.h0(h.U)
            uth0u = h.U.T @ self._h0u
            self._uth0u = 0.5 * (uth0u + uth0u.T)
        self._cached_version = h.version
        return self._h0u, self._uth0u

    def _append_h0u(self) -> None:
        # One new pair since the last refresh: a single solve with B₀.
        assert self._h0u is not None and self._uth0u is not None
        h = self.history
        u = h.U[:, -1]
        hu = self.h0(u)
        evicted = self._h0u.shape[1] == h.m
        core = self._uth0u[1:, 1:] if evicted else self._uth0u
        self._h0u = col_update(self._h0u, hu, h.m)
        border = h.U[:, :-1].T @ hu
        self._uth0u = symmetric_block(core, border[:, None], np.array([[u @ hu]]))
        logger.debug(f"🔍 Updated cached H₀U incrementally (j={h.j})")


def _middle_b(st: MinusState) -> tuple[Array, Array]:
    h = st.history
    if isinstance(st.init, ScalarInit):
        b0s = st.init.sigma * h.S
        stb0s = st.init.sigma * h.sts
    else:
        b0s = st.b0(h.S)
        stb0s = h.S.T @ b0s
        stb0s = 0.5 * (stb0s + stb0s.T)
    return b0s, symmetric_block(stb0s, h.stu_l, -h.d_u)


def apply_B_minus(st: MinusState, x: Array) -> Array:
    """
    Return Bᴹ·x with Bᴹ = K + Aᴹ in compact form.

    Raises:
        SingularMiddleMatrixError: If the middle matrix is singular
    """
    h = st.history
    b0x = st.b0(x)
    if h.j == 0:
        return b0x
    b0s, middle = _middle_b(st)
    w = sym_solve(middle, np.concatenate([b0s.T @ x, h.U.T @ x]))
    return b0x - b0s @ w[: h.j] - h.U @ w[h.j :]


def dense_B_minus(st: MinusState) -> Array:
    """Materialize Bᴹ (tests only, small n)."""
    return apply_B_minus(st, np.eye(st.history.n))


def apply_H_minus(st: MinusState, g: Array) -> Array:
    """
    Return Hᴹ·g with Hᴹ = (K + Aᴹ)⁻¹ from the compact inverse.

    Raises:
        SingularTriangularError: If Rᵁ is singular
    """
    h = st.history
    h0g = st.h0(g)
    if h.j == 0:
        return h0g
    h0u, uth0u = st.h0u()
    t = tri_solve_upper(h.stu_r, h.S.T @ g)
    z = (h.d_u + uth0u) @ t - h0u.T @ g
    top = tri_solve_upper(h.stu_r, z, transpose=True)
    return h0g + h.S @ top - h0u @ t


def search_direction_scalar(st: MinusState, g: Array) -> Array:
    """
    Search direction p = −Hᴹg for B₀ = σI.

    p = −g/σ − [S U]·[[Tᵀ(Dᵁ + UᵀU/σ)T, −Tᵀ/σ], [−T/σ, 0]]·[Sᵀg; Uᵀg],
    costing O(n(4m+1) + 3m²) multiplications.

    Raises:
        SingularTriangularError: If Rᵁ is singular
    """
    if not isinstance(st.init, ScalarInit):
        raise TypeError("search_direction_scalar needs a scalar initialization")
    h = st.history
    sigma = st.init.sigma
    if h.j == 0:
        return -g / sigma
    t = tri_solve_upper(h.stu_r, h.S.T @ g)
    z = (h.d_u + h.utu / sigma) @ t - (h.U.T @ g) / sigma
    top = tri_solve_upper(h.stu_r, z, transpose=True)
    return -g / sigma - h.S @ top + h.U @ (t / sigma)


def search_direction_general(st: MinusState, g: Array) -> Array:
    """
    Search direction p = −Hᴹg for B₀ = σ̄I + K₀.

    With a constant σ̄ and a current H₀U cache this costs one solve with B₀;
    otherwise the cache is rebuilt with one solve per stored pair.

    Raises:
        SingularTriangularError: If Rᵁ is singular
    """
    if not isinstance(st.init, OperatorInit):
        raise TypeError("search_direction_general needs an operator initialization")
    return -apply_H_minus(st, g)
