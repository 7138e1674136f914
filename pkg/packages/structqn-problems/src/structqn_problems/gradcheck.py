"""Central-difference gradient check."""

import numpy as np
from numpy.typing import NDArray
from structqn_core.problem import StructuredProblem

Array = NDArray[np.float64]

# Above this dimension only a random sample of coordinates is differenced.
FULL_CHECK_MAX_N = 2000
SAMPLED_COORDINATES = 200


def fd_gradient_check(
    problem: StructuredProblem,
    x: Array,
    h: float | None = None,
    seed: int = 0,
) -> float:
    """
    Compare ∇k̂ + ∇û with central differences of f = k̂ + û.

    Args:
        problem: Problem to check
        x: Evaluation point
        h: Difference step; defaults to 1e-6·max(1, ‖x‖∞)
        seed: Seed for the coordinate sample when n > FULL_CHECK_MAX_N

    Returns:
        max_i |fdᵢ − gᵢ| / max(1, ‖g‖∞)
    """
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = 1e-6 * max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if not h > 0.0:
        raise ValueError(f"difference step must be positive, got {h}")
    grad = problem.gradient(x)
    if problem.n > FULL_CHECK_MAX_N:
        rng = np.random.default_rng(seed)
        coords = rng.choice(problem.n, SAMPLED_COORDINATES, replace=False)
    else:
        coords = np.arange(problem.n)

    worst = 0.0
    for i in coords:
        step = np.zeros_like(x)
        step[i] = h
        fd = (problem.eval_f(x + step) - problem.eval_f(x - step)) / (2.0 * h)
        worst = max(worst, abs(fd - grad[i]))
    return worst / max(1.0, float(np.max(np.abs(grad), initial=0.0)))
