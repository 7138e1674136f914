"""Shared fixtures for the problem generators."""

from pathlib import Path

import numpy as np
import pytest
from numpy.typing import NDArray
from structqn_core.operators import ScaledIdentityOp
from structqn_core.problem import ProblemMetadata, StructuredProblem

DATA_DIR = Path(__file__).parent / "data"


class BrokenGradient(StructuredProblem):
    """f = ½‖x‖² split evenly, with ∇û off by a constant."""

    def __init__(self, n: int):
        self.n = n
        self.metadata = ProblemMetadata(name="broken", generator="test")

    def eval_k(self, x: NDArray) -> float:
        return 0.25 * float(x @ x)

    def eval_u(self, x: NDArray) -> float:
        return 0.25 * float(x @ x)

    def eval_grad_k(self, x: NDArray) -> NDArray:
        return 0.5 * x

    def eval_grad_u(self, x: NDArray) -> NDArray:
        return 0.5 * x + 0.1

    def known_hessian(self, x: NDArray) -> ScaledIdentityOp:
        return ScaledIdentityOp(self.n, 0.5)

    def initial_point(self) -> NDArray:
        return np.zeros(self.n)


@pytest.fixture
def tiny_libsvm() -> Path:
    return DATA_DIR / "tiny.libsvm"


@pytest.fixture
def broken_gradient() -> BrokenGradient:
    return BrokenGradient(4)
