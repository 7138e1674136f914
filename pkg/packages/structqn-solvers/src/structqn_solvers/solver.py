"""Limited-memory structured quasi-Newton drivers.

`minimize` runs the line-search loop shared by all variants; the variant
specific parts (search direction, the curvature vector u, and what is stored
after a step) live in one driver class per variant:

- MinusDriver: S-BFGS-M with B₀ = σI or B₀ = σ̄I + K₀
- PlusDriver: S-BFGS-P with A₀ = σI, δ-regularized SMW solves
- LbfgsDriver: unstructured L-BFGS on y = g₊ − g (S-BFGS-M with K ≡ 0)
"""

import time
from abc import ABC, abstractmethod
from typing import override

import numpy as np
import scipy.linalg as sla
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import (
    CurvatureRejectError,
    DimensionMismatchError,
    InitNotPDError,
    NotDescentError,
    RegularizationFailedError,
    SingularMiddleMatrixError,
    SingularTriangularError,
)
from structqn_core.models.config import InitStrategy, SolverConfig, Variant
from structqn_core.models.report import RunReport, RunStatus, TraceRecord
from structqn_core.operators import KnownHessianOp
from structqn_core.problem import StructuredProblem

from structqn_solvers.dense_kernels import inf_norm
from structqn_solvers.initializations import probe_sigma_bar, sigma_next
from structqn_solvers.line_search import CurvatureFn, StepResult, strong_wolfe_structured
from structqn_solvers.qn_history import QnHistory
from structqn_solvers.sbfgs_minus import (
    MinusState,
    OperatorInit,
    ScalarInit,
    search_direction_general,
    search_direction_scalar,
)
from structqn_solvers.sbfgs_plus import (
    PlusState,
    ensure_positive_definite,
    solve_plus,
    solve_plus_dense,
)

Array = NDArray[np.float64]


class _Driver(ABC):
    """
    Variant-specific half of a solver run.

    Attributes:
        sigma: σ in force for the next direction
        delta: δ used by the last direction (Plus only)
        rejected_pairs: Pairs skipped by the curvature test
        fallback_steps: Steepest-descent directions taken
        regularization_failed: The last direction came from a failed δ search
    """

    track_v = False
    structured = True

    def __init__(self, problem: StructuredProblem, x0: Array, cfg: SolverConfig):
        self.problem = problem
        self.cfg = cfg
        self.history = QnHistory(
            problem.n, cfg.memory, track_v=self.track_v, curvature_rtol=cfg.curvature_rtol
        )
        self.sigma = self._initial_sigma()
        self.delta: float | None = None
        self.rejected_pairs = 0
        self.fallback_steps = 0
        self.regularization_failed = False
        self._k = problem.known_hessian(x0)

    def _initial_sigma(self) -> float:
        if self.cfg.init_strategy == InitStrategy.CONSTANT and self.cfg.sigma_bar is not None:
            return self.cfg.sigma_bar
        return self.cfg.sigma0

    def known(self, x: Array) -> KnownHessianOp:
        """K(x), reused across iterates when the problem declares it constant."""
        if self.problem.constant_hessian:
            return self._k
        self._k = self.problem.known_hessian(x)
        return self._k

    @abstractmethod
    def _direction(self, x: Array, g: Array) -> Array: ...

    @abstractmethod
    def _apply_sigma(self, sigma: float) -> None: ...

    def curvature(self, g: Array, g_u: Array) -> CurvatureFn:
        """u(α) = K(x + αp)s + ∇û(x + αp) − ∇û(x), or y = g(x + αp) − g(x) when unstructured."""

        def u_of_trial(x_new: Array, s: Array, g_new: Array, g_u_new: Array) -> Array:
            if not self.structured:
                return g_new - g
            return self.known(x_new).apply(s) + (g_u_new - g_u)

        return u_of_trial

    def steepest_descent(self, g: Array, reason: str) -> Array:
        self.fallback_steps += 1
        logger.warning(f"⚠️ {reason}; taking a steepest-descent step")
        return -g

    def direction(self, x: Array, g: Array) -> Array:
        """
        Quasi-Newton direction at x, or −g when none can be formed.

        A singular middle matrix or triangular factor drops the oldest pair
        and retries. Non-finite and non-descent directions fall back to −g.
        """
        self.delta = None
        self.regularization_failed = False
        while True:
            try:
                p = self._direction(x, g)
                break
            except (SingularTriangularError, SingularMiddleMatrixError) as e:
                if self.history.j == 0:
                    return self.steepest_descent(g, f"direction failed: {e}")
                logger.warning(f"⚠️ {e}; dropping the oldest pair")
                self.history.drop_oldest()
        if not np.all(np.isfinite(p)):
            return self.steepest_descent(g, "direction is not finite")
        if not float(g @ p) < 0.0:
            return self.steepest_descent(g, f"pᵀg = {float(g @ p):.3e} is not negative")
        return p

    def accept(self, step: StepResult, g: Array, g_u: Array) -> None:
        """Store the pair of an accepted step and move σ to its next value."""
        assert step.u is not None
        u_hat = step.g_u_new - g_u if self.structured else step.g_new - g
        # v = K₊s is the known-Hessian share of u
        v = step.u - u_hat if self.track_v else None
        try:
            self.history.push_pair(step.s, step.u, v)
        except CurvatureRejectError as e:
            self.rejected_pairs += 1
            logger.warning(f"⚠️ Pair rejected: {e}")
            return
        if self.cfg.init_strategy == InitStrategy.CONSTANT:
            return
        sigma = sigma_next(
            self.cfg.init_strategy, step.s, step.u, u_hat, self.sigma, self.cfg.sigma_min
        )
        if sigma != self.sigma:
            self._apply_sigma(sigma)


class MinusDriver(_Driver):
    """S-BFGS-M with either the scalar or the known-Hessian initialization."""

    def __init__(self, problem: StructuredProblem, x0: Array, cfg: SolverConfig):
        super().__init__(problem, x0, cfg)
        init: ScalarInit | OperatorInit
        if cfg.operator_init:
            k0 = self._k
            constant = cfg.init_strategy == InitStrategy.CONSTANT
            if constant and cfg.sigma_bar is not None:
                sigma_bar = cfg.sigma_bar
            else:
                sigma_bar = probe_sigma_bar(k0, cfg.delta_cap)
            self.sigma = sigma_bar
            init = OperatorInit(k0, sigma_bar, constant=constant and cfg.constant_sigma_cache)
        else:
            init = ScalarInit(self.sigma)
        self.state = MinusState(self.history, init)

    @override
    def _direction(self, x: Array, g: Array) -> Array:
        if isinstance(self.state.init, ScalarInit):
            return search_direction_scalar(self.state, g)
        return search_direction_general(self.state, g)

    @override
    def _apply_sigma(self, sigma: float) -> None:
        try:
            self.state.set_sigma(sigma)
        except InitNotPDError as e:
            logger.warning(f"⚠️ {e}; keeping σ = {self.sigma:.3e}")
            return
        self.sigma = sigma


class LbfgsDriver(MinusDriver):
    """Unstructured L-BFGS: pairs (s, y) with y = g₊ − g and B₀ = σI."""

    structured = False


class PlusDriver(_Driver):
    """S-BFGS-P: solves (K + Aᴾ + δI)p = −g with K evaluated at every iterate."""

    track_v = True

    def __init__(self, problem: StructuredProblem, x0: Array, cfg: SolverConfig):
        super().__init__(problem, x0, cfg)
        self.state = PlusState(self.history, self.sigma, self._k, dense_cap=cfg.dense_cap)

    @override
    def _direction(self, x: Array, g: Array) -> Array:
        st = self.state.refresh(self.sigma, self.known(x))
        try:
            ensure_positive_definite(
                st, self.cfg.delta_mode, self.cfg.delta_cap, self.cfg.delta_epsilon
            )
        except RegularizationFailedError as e:
            self.regularization_failed = True
            return self.steepest_descent(g, str(e))
        self.delta = st.delta
        try:
            return solve_plus(st, g)
        except InitNotPDError:
            try:
                return solve_plus_dense(st, g)
            except (InitNotPDError, sla.LinAlgError) as e:
                return self.steepest_descent(g, f"no positive definite solve: {e}")

    @override
    def _apply_sigma(self, sigma: float) -> None:
        self.sigma = sigma


DRIVERS: dict[Variant, type[_Driver]] = {
    Variant.MINUS: MinusDriver,
    Variant.PLUS: PlusDriver,
    Variant.LBFGS: LbfgsDriver,
}


def minimize(
    problem: StructuredProblem,
    x0: Array | None = None,
    cfg: SolverConfig | None = None,
) -> RunReport:
    """
    Minimize a structured objective with a limited-memory quasi-Newton method.

    Args:
        problem: Objective split into known and unknown parts
        x0: Starting point (defaults to the problem's canonical start)
        cfg: Solver configuration

    Returns:
        RunReport; failures of the line search or the δ search are reported
        through its status, not raised

    Raises:
        DimensionMismatchError: If x0 does not have length problem.n
        InitNotPDError: If the operator initialization cannot be made
            positive definite
    """
    cfg = cfg or SolverConfig()
    x = np.array(problem.initial_point() if x0 is None else x0, dtype=np.float64)
    if x.shape != (problem.n,):
        raise DimensionMismatchError(f"x0 has shape {x.shape}, expected ({problem.n},)")

    logger.info(
        f"🚀 Minimizing {problem.name} (n={problem.n}) with {cfg.variant} "
        f"m={cfg.memory} {cfg.init_strategy}"
    )
    started = time.perf_counter()
    driver = DRIVERS[cfg.variant](problem, x, cfg)
    f = problem.eval_f(x)
    g_u = problem.eval_grad_u(x)
    g = problem.eval_grad_k(x) + g_u
    f_evals = g_evals = 1
    trace = [TraceRecord(k=0, f=f, gnorm_inf=inf_norm(g), sigma=driver.sigma)]
    iterations = 0

    while True:
        if inf_norm(g) <= cfg.epsilon:
            status = RunStatus.CONVERGED
            break
        if iterations >= cfg.max_iters:
            status = RunStatus.MAX_ITERS
            break
        p = driver.direction(x, g)
        try:
            step = strong_wolfe_structured(
                problem, x, p, f, g, driver.curvature(g, g_u), cfg.wolfe
            )
        except NotDescentError as e:
            logger.error(f"❌ {e}")
            status = RunStatus.LINE_SEARCH_FAILURE
            break
        f_evals += step.evals
        g_evals += step.evals
        if not step.converged:
            status = (
                RunStatus.REGULARIZATION_FAILURE
                if driver.regularization_failed
                else RunStatus.LINE_SEARCH_FAILURE
            )
            logger.error(f"❌ Line search ended with {step.status} at k={iterations}")
            break

        driver.accept(step, g, g_u)
        assert step.u is not None
        x, f, g, g_u = step.x_new, step.f_new, step.g_new, step.g_u_new
        iterations += 1
        record = TraceRecord(
            k=iterations,
            f=f,
            gnorm_inf=inf_norm(g),
            alpha=step.alpha,
            sigma=driver.sigma,
            delta=driver.delta,
            s_dot_u=float(step.s @ step.u),
        )
        trace.append(record)
        logger.debug(
            f"🔍 k={iterations} f={f:.6e} ‖g‖∞={record.gnorm_inf:.3e} "
            f"α={step.alpha:.3e} σ={driver.sigma:.3e}"
        )

    report = RunReport(
        status=status,
        iterations=iterations,
        f_evals=f_evals,
        g_evals=g_evals,
        final_f=f,
        final_gnorm_inf=inf_norm(g),
        wall_time=time.perf_counter() - started,
        rejected_pairs=driver.rejected_pairs,
        fallback_steps=driver.fallback_steps,
        trace=trace,
        x_final=x.tolist(),
    )
    if report.converged:
        logger.info(f"✅ {problem.name}: converged in {iterations} iterations (f={f:.6e})")
    else:
        logger.warning(f"⚠️ {problem.name}: {status} after {iterations} iterations")
    return report
