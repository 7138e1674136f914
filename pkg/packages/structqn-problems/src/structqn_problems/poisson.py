"""Optimal control of the 2D Poisson equation on the unit square.

The control x enters as the right-hand side of the 5-point finite-difference
Laplacian A on the interior grid, and the state y(x) = A⁻¹(x + g) is matched
to a target y*:

    k̂(x) = ½‖x‖²,    û(x) = ½‖A⁻¹(x + g) − y*‖²

With N = 10j grid points per direction (boundary included), the interior has
N − 2 points per direction and n = (10j − 2)². The boundary values are zero,
so g = 0, and y*(s, t) = sin(πs)·sin(πt).
"""

from collections.abc import Callable
from typing import override

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from loguru import logger
from numpy.typing import NDArray
from structqn_core.operators import ScaledIdentityOp
from structqn_core.problem import ProblemMetadata, StructuredProblem

Array = NDArray[np.float64]


def laplacian_2d(m: int, h: float) -> sp.csc_matrix:
    """5-point Laplacian −Δ on an m×m interior grid with spacing h, row-major ordering."""
    main = 2.0 * np.ones(m)
    off = -np.ones(m - 1)
    t = sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2
    eye = sp.identity(m, format="csr")
    return sp.csc_matrix(sp.kron(eye, t) + sp.kron(t, eye))


class PoissonControl(StructuredProblem):
    """Tracking-type Poisson control; one sparse LU of A serves the state and adjoint solves."""

    def __init__(self, j: int):
        if j < 1:
            raise ValueError(f"mesh index must be at least 1, got {j}")
        self.j = j
        self.grid_points = 10 * j
        m = self.grid_points - 2
        self.h = 1.0 / (self.grid_points - 1)
        self.n = m * m
        self.A = laplacian_2d(m, self.h)
        self._solve: Callable[[Array], Array] = spla.factorized(self.A)
        nodes = self.h * np.arange(1, m + 1)
        s, t = np.meshgrid(nodes, nodes, indexing="ij")
        self.target = (np.sin(np.pi * s) * np.sin(np.pi * t)).ravel()
        self.boundary = np.zeros(self.n)
        self._identity = ScaledIdentityOp(self.n, 1.0)
        self.metadata = ProblemMetadata(
            name=f"poisson-j{j}", generator="poisson_control", params={"j": j}
        )
        logger.debug(f"🔍 Factorized {self.n}×{self.n} Poisson matrix (j={j})")

    def state(self, x: Array) -> Array:
        """y(x) = A⁻¹(x + g)."""
        return self._solve(x + self.boundary)

    def eval_k(self, x: Array) -> float:
        return 0.5 * float(x @ x)

    def eval_u(self, x: Array) -> float:
        residual = self.state(x) - self.target
        return 0.5 * float(residual @ residual)

    def eval_grad_k(self, x: Array) -> Array:
        return x.copy()

    def eval_grad_u(self, x: Array) -> Array:
        # A is symmetric, so the adjoint solve reuses the same factorization.
        return self._solve(self.state(x) - self.target)

    @override
    def known_hessian(self, x: Array) -> ScaledIdentityOp:
        return self._identity

    def initial_point(self) -> Array:
        return np.zeros(self.n)

    @property
    def constant_hessian(self) -> bool:
        return True


def make_poisson_control(j: int) -> PoissonControl:
    return PoissonControl(j)
