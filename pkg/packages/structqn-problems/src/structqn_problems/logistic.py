"""Regularized logistic regression split into a ridge term and the loss.

    k̂(x) = (λ/2)‖x‖²,    û(x) = Σᵢ log(1 + exp(−yᵢ xᵀdᵢ))
"""

from pathlib import Path
from typing import override

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit
from structqn_core.operators import ScaledIdentityOp
from structqn_core.problem import ProblemMetadata, StructuredProblem

from structqn_problems.libsvm import LibsvmData, read_libsvm

Array = NDArray[np.float64]

DEFAULT_LAMBDA = 1e-3


class LogisticProblem(StructuredProblem):
    """Logistic loss over LIBSVM samples with known Hessian λI."""

    def __init__(
        self, data: LibsvmData, lam: float = DEFAULT_LAMBDA, metadata: ProblemMetadata | None = None
    ):
        if not lam > 0.0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.data = data
        self.lam = float(lam)
        self.n = data.n_features
        self._ridge = ScaledIdentityOp(self.n, self.lam)
        self.metadata = metadata or ProblemMetadata(
            name=f"logistic-{data.n_samples}x{self.n}",
            generator="logistic",
            params={"lam": self.lam},
        )

    def _margins(self, x: Array) -> Array:
        """−yᵢ xᵀdᵢ for every sample."""
        return -self.data.labels * (self.data.features @ x)

    def eval_k(self, x: Array) -> float:
        return 0.5 * self.lam * float(x @ x)

    def eval_u(self, x: Array) -> float:
        # log(1 + eᵗ) without overflow
        return float(np.sum(np.logaddexp(0.0, self._margins(x))))

    def eval_grad_k(self, x: Array) -> Array:
        return self.lam * x

    def eval_grad_u(self, x: Array) -> Array:
        weights = -self.data.labels * expit(self._margins(x))
        return np.asarray(self.data.features.T @ weights)

    @override
    def known_hessian(self, x: Array) -> ScaledIdentityOp:
        return self._ridge

    def initial_point(self) -> Array:
        return np.zeros(self.n)

    @property
    def constant_hessian(self) -> bool:
        return True


def make_logistic(
    path: str | Path | LibsvmData, lam: float = DEFAULT_LAMBDA, n_features: int | None = None
) -> LogisticProblem:
    """
    Build a logistic regression problem from a LIBSVM file or an already parsed dataset.

    Raises:
        ParseError: If the file is malformed
        EmptyDatasetError: If the file holds no samples
    """
    if isinstance(path, LibsvmData):
        return LogisticProblem(path, lam)
    dataset = read_libsvm(path, n_features)
    metadata = ProblemMetadata(
        name=f"logistic-{Path(path).stem}",
        generator="logistic",
        params={"path": str(path), "lam": lam},
    )
    return LogisticProblem(dataset, lam, metadata)
