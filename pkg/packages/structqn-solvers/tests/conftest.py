"""Shared fixtures: small structured problems and random pair histories."""

from collections.abc import Callable
from typing import override

import numpy as np
import pytest
from numpy.typing import NDArray
from structqn_core.operators import DenseOp, DiagonalOp, KnownHessianOp
from structqn_core.problem import ProblemMetadata, StructuredProblem
from structqn_solvers.qn_history import QnHistory

Array = NDArray[np.float64]


def random_spd(rng: np.random.Generator, n: int, low: float = 0.5, high: float = 5.0) -> Array:
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (basis * rng.uniform(low, high, n)) @ basis.T


class DenseQuadratic(StructuredProblem):
    """k̂ = ½xᵀKx + cᵀx with dense K, û = ½xᵀAx."""

    def __init__(self, K: Array, A: Array, c: Array):
        self.K, self.A, self.c = K, A, c
        self.n = c.shape[0]
        self.metadata = ProblemMetadata(name=f"dense-quadratic-n{self.n}", generator="test")

    def eval_k(self, x: Array) -> float:
        return 0.5 * float(x @ self.K @ x) + float(self.c @ x)

    def eval_u(self, x: Array) -> float:
        return 0.5 * float(x @ self.A @ x)

    def eval_grad_k(self, x: Array) -> Array:
        return self.K @ x + self.c

    def eval_grad_u(self, x: Array) -> Array:
        return self.A @ x

    @override
    def known_hessian(self, x: Array) -> KnownHessianOp:
        return DenseOp(self.K)

    @property
    def constant_hessian(self) -> bool:
        return True

    def initial_point(self) -> Array:
        return np.zeros(self.n)

    def minimizer(self) -> Array:
        return np.linalg.solve(self.K + self.A, -self.c)


class RosenbrockPlusQuartic(StructuredProblem):
    """
    û = extended Rosenbrock (gradient only), k̂ = Σ xᵢ⁴/12 + ½‖x‖² with
    K(x) = diag(xᵢ² + 1).
    """

    def __init__(self, n: int):
        if n % 2:
            raise ValueError("n must be even")
        self.n = n
        self.metadata = ProblemMetadata(name=f"rosenbrock-n{n}", generator="test")

    def eval_k(self, x: Array) -> float:
        return float(np.sum(x**4) / 12.0 + 0.5 * x @ x)

    def eval_u(self, x: Array) -> float:
        odd, even = x[0::2], x[1::2]
        return float(np.sum(100.0 * (even - odd**2) ** 2 + (1.0 - odd) ** 2))

    def eval_grad_k(self, x: Array) -> Array:
        return x**3 / 3.0 + x

    def eval_grad_u(self, x: Array) -> Array:
        odd, even = x[0::2], x[1::2]
        grad = np.zeros_like(x)
        grad[0::2] = -400.0 * odd * (even - odd**2) - 2.0 * (1.0 - odd)
        grad[1::2] = 200.0 * (even - odd**2)
        return grad

    def known_hessian(self, x: Array) -> KnownHessianOp:
        return DiagonalOp(x**2 + 1.0)

    def initial_point(self) -> Array:
        x = np.ones(self.n)
        x[0::2] = -1.2
        return x


HistoryFactory = Callable[..., QnHistory]


@pytest.fixture
def spd() -> Callable[..., Array]:
    """Random symmetric positive definite matrices with eigenvalues in [low, high]."""
    return random_spd


@pytest.fixture
def make_history() -> HistoryFactory:
    """
    Build a history from random pairs with sᵀu > 0.

    u = Cs with C symmetric positive definite; v = Kᵢs with a fresh
    diagonal Kᵢ per pair when V is tracked.
    """

    def build(
        n: int, m: int, pairs: int, seed: int = 0, track_v: bool = False
    ) -> QnHistory:
        rng = np.random.default_rng(seed)
        C = random_spd(rng, n)
        history = QnHistory(n, m, track_v=track_v)
        for _ in range(pairs):
            s = rng.standard_normal(n)
            v = rng.uniform(0.5, 2.0, n) * s if track_v else None
            history.push_pair(s, C @ s, v)
        return history

    return build


@pytest.fixture
def dense_quadratic() -> DenseQuadratic:
    rng = np.random.default_rng(42)
    n = 12
    return DenseQuadratic(random_spd(rng, n, 1.0, 10.0), random_spd(rng, n), rng.standard_normal(n))


@pytest.fixture
def parabola() -> DenseQuadratic:
    """f(x) = ½x² in one dimension."""
    return DenseQuadratic(np.array([[1.0]]), np.zeros((1, 1)), np.zeros(1))


@pytest.fixture
def rosenbrock() -> type[RosenbrockPlusQuartic]:
    return RosenbrockPlusQuartic
