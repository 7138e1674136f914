"""Scalar initializations σₖ for A₀ = σₖI and the σ̄ probe for B₀ = σ̄I + K₀."""

import math

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import InitNotPDError
from structqn_core.models.config import InitStrategy
from structqn_core.operators import KnownHessianOp

Array = NDArray[np.float64]


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.nan
    return num / den


def sigma_next(
    strategy: InitStrategy,
    s: Array,
    u: Array,
    u_hat: Array,
    previous: float,
    sigma_min: float = 1e-8,
) -> float:
    """
    Next scalar initialization from the newest pair.

    Init1 = uᵀu/sᵀu, Init2 = ûᵀû/sᵀû, Init3 = sᵀu/sᵀs, Init4 = sᵀû/sᵀs,
    where û = ∇û(x₊) − ∇û(x) is the gradient difference of the unknown part.

    Args:
        strategy: Which formula to use; constant returns `previous`
        s: Step
        u: Structured gradient difference
        u_hat: Unknown-part gradient difference
        previous: σ in force before this pair
        sigma_min: Values at or below this are replaced by `previous`

    Returns:
        The formula value, or `previous` when it is not finite or ≤ sigma_min
    """
    match strategy:
        case InitStrategy.INIT1:
            value = _ratio(float(u @ u), float(s @ u))
        case InitStrategy.INIT2:
            value = _ratio(float(u_hat @ u_hat), float(s @ u_hat))
        case InitStrategy.INIT3:
            value = _ratio(float(s @ u), float(s @ s))
        case InitStrategy.INIT4:
            value = _ratio(float(s @ u_hat), float(s @ s))
        case InitStrategy.CONSTANT:
            return previous
    if not math.isfinite(value) or value <= sigma_min:
        logger.debug(f"⚠️ {strategy} gave σ = {value:.3e}; keeping σ = {previous:.3e}")
        return previous
    return value


def probe_sigma_bar(k0: KnownHessianOp, cap: int = 12) -> float:
    """
    Return 10ⁱ for the first i = 0, 1, ..., cap with 10ⁱI + K₀ positive definite.

    Raises:
        InitNotPDError: If no shift up to 10^cap works
    """
    for exponent in range(cap + 1):
        sigma_bar = 10.0**exponent
        if k0.shifted_is_pd(sigma_bar):
            if exponent:
                logger.debug(f"🔍 σ̄ = {sigma_bar:.0e} makes σ̄I + K₀ positive definite")
            return sigma_bar
    raise InitNotPDError(f"σ̄I + K₀ is not positive definite for any σ̄ ≤ 1e{cap}")
