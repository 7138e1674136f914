"""Solver and line-search configuration models."""

from enum import StrEnum
from typing import Self

from pydantic import Field, model_validator

from structqn_core.models.base import StrictModel


class Variant(StrEnum):
    """Which quasi-Newton update drives the solver."""

    MINUS = "minus"
    PLUS = "plus"
    LBFGS = "lbfgs"


class InitStrategy(StrEnum):
    """How σₖ (the scalar initialization) is chosen each iteration."""

    INIT1 = "init1"  # uᵀu / sᵀu
    INIT2 = "init2"  # ûᵀû / sᵀû
    INIT3 = "init3"  # sᵀu / sᵀs
    INIT4 = "init4"  # sᵀû / sᵀs
    CONSTANT = "constant"


class MinusInitMode(StrEnum):
    """B₀ for the Minus update: σI, or σ̄I + K₀ applied through the known Hessian."""

    SCALAR = "scalar"
    OPERATOR = "operator"


class DeltaMode(StrEnum):
    """How the Plus variant picks the identity shift δ."""

    POWER_OF_TEN = "power-of-ten"
    CHEAP = "cheap"


class WolfeConfig(StrictModel):
    """Strong Wolfe line-search parameters (defaults c1=1e-4, c2=0.9)."""

    c1: float = Field(default=1e-4, gt=0.0, lt=1.0)
    c2: float = Field(default=0.9, gt=0.0, lt=1.0)
    alpha_init: float = Field(default=1.0, gt=0.0)
    alpha_min: float = Field(default=0.0, ge=0.0)
    alpha_max: float = Field(default=1e8, gt=0.0)
    max_evals: int = Field(default=60, ge=1)
    xtol: float = Field(default=1e-14, gt=0.0)
    extrapolation: float = Field(default=2.0, gt=1.1)
    require_structured_curvature: bool = True

    @model_validator(mode="after")
    def check_ordering(self) -> Self:
        if self.c1 > self.c2:
            raise ValueError("c1 must not exceed c2")
        if self.alpha_min >= self.alpha_max:
            raise ValueError("alpha_min must be below alpha_max")
        if not self.alpha_min < self.alpha_init <= self.alpha_max:
            raise ValueError("alpha_init must lie in (alpha_min, alpha_max]")
        return self


class SolverConfig(StrictModel):
    """
    Configuration of one limited-memory solver.

    Attributes:
        variant: minus, plus or the unstructured lbfgs baseline
        memory: Number of stored pairs m
        epsilon: Stop when ‖g‖∞ ≤ epsilon
        max_iters: Iteration budget
        init_strategy: σ rule (Init1..Init4 or constant)
        sigma0: σ for the first iteration of the scalar paths
        sigma_bar: Constant σ for the constant strategy; on the operator path
            None means probe 10ⁱ until σ̄I + K₀ is positive definite
        sigma_min: σ values at or below this are rejected by the safeguard
        minus_init_mode: scalar (B₀ = σI) or operator (B₀ = σ̄I + K₀)
        constant_sigma_cache: Update (σ̄I + K₀)⁻¹U incrementally when σ̄ is constant
        delta_mode: power-of-ten search or the cheap formula for the Plus shift
        delta_epsilon: ε of the cheap formula
        delta_cap: Largest exponent j tried in the power-of-ten search
        dense_cap: Largest n for the dense positive-definiteness fallback
        curvature_rtol: Pairs with sᵀu ≤ curvature_rtol·‖s‖‖u‖ are rejected
        wolfe: Line-search parameters
    """

    variant: Variant = Variant.MINUS
    memory: int = Field(default=8, ge=1)
    epsilon: float = Field(default=1e-6, gt=0.0)
    max_iters: int = Field(default=10_000, ge=0)
    init_strategy: InitStrategy = InitStrategy.INIT1
    sigma0: float = Field(default=1.0, gt=0.0)
    sigma_bar: float | None = Field(default=None, ge=0.0)
    sigma_min: float = Field(default=1e-8, gt=0.0)
    minus_init_mode: MinusInitMode = MinusInitMode.SCALAR
    constant_sigma_cache: bool = True
    delta_mode: DeltaMode = DeltaMode.POWER_OF_TEN
    delta_epsilon: float = Field(default=1e-8, gt=0.0)
    delta_cap: int = Field(default=12, ge=0)
    dense_cap: int = Field(default=500, ge=0)
    curvature_rtol: float = Field(default=1e-12, ge=0.0)
    wolfe: WolfeConfig = Field(default_factory=WolfeConfig)

    @model_validator(mode="after")
    def check_constant_sigma(self) -> Self:
        scalar_minus = (
            self.variant != Variant.PLUS and self.minus_init_mode == MinusInitMode.SCALAR
        )
        if (
            self.init_strategy == InitStrategy.CONSTANT
            and scalar_minus
            and self.sigma_bar is not None
            and self.sigma_bar <= 0.0
        ):
            raise ValueError("sigma_bar must be positive for a scalar initialization")
        return self

    @property
    def operator_init(self) -> bool:
        return self.variant == Variant.MINUS and self.minus_init_mode == MinusInitMode.OPERATOR
