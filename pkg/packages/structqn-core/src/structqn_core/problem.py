"""Structured objective f = k̂ + û with known and unknown second-order parts."""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from structqn_core.operators import KnownHessianOp

Array = NDArray[np.float64]


class ProblemMetadata(BaseModel):
    """Name, generator parameters and seed identifying a problem instance."""

    model_config = ConfigDict(frozen=True)

    name: str
    generator: str
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int | None = None


class StructuredProblem(ABC):
    """
    Abstract structured objective.

    Subclasses split the objective into a part k̂ whose Hessian K(x) is known
    and a part û for which only gradients are available. Instances are
    immutable after construction and evaluators are re-entrant.

    Attributes:
        n: Dimension of the variable
        metadata: Identification used in reports and CSV output
    """

    n: int
    metadata: ProblemMetadata

    @abstractmethod
    def eval_k(self, x: Array) -> float:
        """Return k̂(x)."""

    @abstractmethod
    def eval_u(self, x: Array) -> float:
        """Return û(x)."""

    @abstractmethod
    def eval_grad_k(self, x: Array) -> Array:
        """Return ∇k̂(x)."""

    @abstractmethod
    def eval_grad_u(self, x: Array) -> Array:
        """Return ∇û(x)."""

    @abstractmethod
    def known_hessian(self, x: Array) -> KnownHessianOp:
        """Return the operator K(x) = ∇²k̂(x)."""

    @abstractmethod
    def initial_point(self) -> Array:
        """Return the canonical starting point."""

    @property
    def constant_hessian(self) -> bool:
        """Hint that K(x) is the same operator for every x."""
        return False

    def eval_f(self, x: Array) -> float:
        return self.eval_k(x) + self.eval_u(x)

    def gradient(self, x: Array) -> Array:
        return self.eval_grad_k(x) + self.eval_grad_u(x)

    @property
    def name(self) -> str:
        return self.metadata.name
