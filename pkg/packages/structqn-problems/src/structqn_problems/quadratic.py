"""Structured quadratics built from two low-rank-plus-identity Hessians.

With Qᵢ(x; φ, r) = ½xᵀ(φI + QᵢDᵢQᵢᵀ)x and orthonormal n×r bases Qᵢ,

    k̂(x) = xᵀg + Q₁(x; φ, r),    û(x) = Q₂(x; φ, r).

Each Hessian has n − r eigenvalues equal to φ and r eigenvalues φ + Dᵢ.
"""

from typing import override

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import BadRankError, DimensionMismatchError
from structqn_core.operators import LowRankShiftOp
from structqn_core.problem import ProblemMetadata, StructuredProblem

Array = NDArray[np.float64]

# φ = 1 pairs with D in [0, 999]; φ = 1000 with D in [−999, 0]. Both put the
# spectrum in [1, 1000].
LOW_PHI_D_RANGE = (0.0, 999.0)
HIGH_PHI_D_RANGE = (-999.0, 0.0)
HIGH_PHI = 1000.0


def default_d_range(phi: float) -> tuple[float, float]:
    return HIGH_PHI_D_RANGE if phi >= HIGH_PHI else LOW_PHI_D_RANGE


def orthonormal_columns(rng: np.random.Generator, n: int, r: int) -> Array:
    """Orthonormalize r gaussian columns with a reduced Householder QR."""
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


class StructuredQuadratic(StructuredProblem):
    """
    f(x) = xᵀg + ½xᵀH₁x + ½xᵀH₂x with H₁ known and H₂ learned.

    Attributes:
        g: Linear term
        known: H₁ = φI + Q₁D₁Q₁ᵀ
        unknown: H₂ = φI + Q₂D₂Q₂ᵀ
    """

    def __init__(
        self,
        g: Array,
        known: LowRankShiftOp,
        unknown: LowRankShiftOp,
        metadata: ProblemMetadata | None = None,
    ):
        if not (g.shape[0] == known.n == unknown.n):
            raise DimensionMismatchError(
                f"g has length {g.shape[0]}, Hessians have orders {known.n} and {unknown.n}"
            )
        self.g = np.asarray(g, dtype=np.float64)
        self.known = known
        self.unknown = unknown
        self.n = self.g.shape[0]
        self.metadata = metadata or ProblemMetadata(
            name=f"quadratic-n{self.n}", generator="structured_quadratic", params={"n": self.n}
        )

    def eval_k(self, x: Array) -> float:
        return float(x @ self.g + 0.5 * x @ self.known.apply(x))

    def eval_u(self, x: Array) -> float:
        return float(0.5 * x @ self.unknown.apply(x))

    def eval_grad_k(self, x: Array) -> Array:
        return self.g + self.known.apply(x)

    def eval_grad_u(self, x: Array) -> Array:
        return self.unknown.apply(x)

    @override
    def known_hessian(self, x: Array) -> LowRankShiftOp:
        return self.known

    def initial_point(self) -> Array:
        return np.zeros(self.n)

    @property
    def constant_hessian(self) -> bool:
        return True

    def hessian_dense(self) -> Array:
        """H₁ + H₂ as a dense array (small n only)."""
        return self.known.to_dense() + self.unknown.to_dense()

    def minimizer(self) -> Array:
        """x* = −(H₁ + H₂)⁻¹g by a dense solve (small n only)."""
        return -np.linalg.solve(self.hessian_dense(), self.g)


def make_structured_quadratic(
    n: int,
    r: int | None = None,
    phi: float = 1.0,
    d_range: tuple[float, float] | None = None,
    seed: int = 0,
) -> StructuredQuadratic:
    """
    Generate a structured quadratic.

    Args:
        n: Dimension
        r: Rank of each low-rank term (defaults to max(1, n // 10))
        phi: Identity weight φ > 0
        d_range: Interval for the uniform entries of D₁ and D₂ (defaults to
            [0, 999] for φ < 1000 and [−999, 0] otherwise)
        seed: Seed of the numpy Generator drawing Q₁, Q₂, D₁, D₂ and g

    Raises:
        BadRankError: If r is not in [1, n]
        ValueError: If phi is not positive
    """
    r = max(1, n // 10) if r is None else r
    if not 1 <= r <= n:
        raise BadRankError(f"rank must lie in [1, {n}], got {r}")
    if not phi > 0.0:
        raise ValueError(f"phi must be positive, got {phi}")
    lo, hi = d_range or default_d_range(phi)
    rng = np.random.default_rng(seed)
    q1 = orthonormal_columns(rng, n, r)
    q2 = orthonormal_columns(rng, n, r)
    d1 = rng.uniform(lo, hi, r)
    d2 = rng.uniform(lo, hi, r)
    g = rng.standard_normal(n)
    metadata = ProblemMetadata(
        name=f"quadratic-n{n}-r{r}-phi{phi:g}",
        generator="structured_quadratic",
        params={"n": n, "r": r, "phi": phi, "d_range": [lo, hi]},
        seed=seed,
    )
    logger.debug(f"🔍 Generated {metadata.name} (seed={seed})")
    return StructuredQuadratic(
        g, LowRankShiftOp(phi, q1, d1), LowRankShiftOp(phi, q2, d2), metadata
    )
