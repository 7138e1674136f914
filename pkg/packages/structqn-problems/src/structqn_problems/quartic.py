"""Structured quartic with a diagonal, point-dependent known Hessian.

    k̂(x) = (1/12)·Σ(aᵢ²xᵢ⁴ + 12xᵢgᵢ),    û(x) = ½·Σ qᵢxᵢ²

so K(x) = diag(aᵢ²xᵢ²) and ∇û(x) = q ∘ x.
"""

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import DimensionMismatchError
from structqn_core.operators import DiagonalOp
from structqn_core.problem import ProblemMetadata, StructuredProblem

Array = NDArray[np.float64]

# Coefficients with |aᵢ| below this are redrawn.
MIN_ABS_A = 0.1


class StructuredQuartic(StructuredProblem):
    def __init__(self, a: Array, g: Array, q: Array, metadata: ProblemMetadata | None = None):
        self.a = np.asarray(a, dtype=np.float64)
        self.g = np.asarray(g, dtype=np.float64)
        self.q = np.asarray(q, dtype=np.float64)
        if not (self.a.shape == self.g.shape == self.q.shape) or self.a.ndim != 1:
            raise DimensionMismatchError("a, g and q must be vectors of the same length")
        self.n = self.a.shape[0]
        self._a2 = self.a**2
        self.metadata = metadata or ProblemMetadata(
            name=f"quartic-n{self.n}", generator="structured_quartic", params={"n": self.n}
        )

    def eval_k(self, x: Array) -> float:
        return float(np.sum(self._a2 * x**4) / 12.0 + x @ self.g)

    def eval_u(self, x: Array) -> float:
        return 0.5 * float(np.sum(self.q * x**2))

    def eval_grad_k(self, x: Array) -> Array:
        return self._a2 * x**3 / 3.0 + self.g

    def eval_grad_u(self, x: Array) -> Array:
        return self.q * x

    def known_hessian(self, x: Array) -> DiagonalOp:
        return DiagonalOp(self._a2 * x**2)

    def initial_point(self) -> Array:
        return np.ones(self.n)


def make_structured_quartic(n: int, seed: int = 0) -> StructuredQuartic:
    """
    Draw a, g, q from the standard normal distribution.

    Entries of a with |aᵢ| < 0.1 are redrawn so K(x) stays away from
    singular for x away from zero.
    """
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n)
    small = np.abs(a) < MIN_ABS_A
    while np.any(small):
        a[small] = rng.standard_normal(int(small.sum()))
        small = np.abs(a) < MIN_ABS_A
    g = rng.standard_normal(n)
    q = rng.standard_normal(n)
    metadata = ProblemMetadata(
        name=f"quartic-n{n}", generator="structured_quartic", params={"n": n}, seed=seed
    )
    logger.debug(f"🔍 Generated {metadata.name} (seed={seed})")
    return StructuredQuartic(a, g, q, metadata)
