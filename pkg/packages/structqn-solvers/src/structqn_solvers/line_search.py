"""Strong Wolfe line search with the structured curvature condition sᵀu > 0.

The bracketing and interpolation follow Moré and Thuente: a safeguarded step
`_Interval.step` chooses the next trial from cubic and quadratic models of
φ(α) = f(x + αp), and the outer loop switches from a modified function
ψ(α) = φ(α) − φ(0) − c1·α·φ'(0) to φ itself once a trial has ψ ≤ 0 and φ' ≥ 0.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import LineSearchStalledError, MaxEvalsError, NotDescentError
from structqn_core.models.config import WolfeConfig
from structqn_core.problem import StructuredProblem

Array = NDArray[np.float64]

# (x_new, s, ∇f(x_new), ∇û(x_new)) -> u, e.g. K(x_new)s + ∇û(x_new) − ∇û(x)
CurvatureFn = Callable[[Array, Array, Array, Array], Array]

XTRAP_LOWER = 1.1
BISECTION_TRIGGER = 0.66


class LineSearchStatus(StrEnum):
    CONVERGED = "converged"
    MAX_EVALS = "max-evals"
    NO_DESCENT = "no-descent"
    STALLED = "stalled"


@dataclass
class StepResult:
    """Outcome of one line search; `u` is None unless a trial passed the Wolfe test."""

    alpha: float
    x_new: Array
    f_new: float
    g_new: Array
    g_u_new: Array
    s: Array
    u: Array | None
    evals: int
    status: LineSearchStatus
    curvature_rejects: int = 0

    @property
    def converged(self) -> bool:
        return self.status == LineSearchStatus.CONVERGED

    def raise_for_status(self) -> None:
        """Raise the matching error unless the search converged."""
        match self.status:
            case LineSearchStatus.CONVERGED:
                return
            case LineSearchStatus.MAX_EVALS:
                raise MaxEvalsError(f"no acceptable step within {self.evals} evaluations")
            case LineSearchStatus.NO_DESCENT:
                raise NotDescentError("no trial step decreased the objective")
            case LineSearchStatus.STALLED:
                raise LineSearchStalledError(f"bracket collapsed at α = {self.alpha:.3e}")


def _cubic_gamma(theta: float, s: float, da: float, db: float) -> float:
    return s * math.sqrt(max(0.0, (theta / s) ** 2 - (da / s) * (db / s)))


@dataclass
class _Interval:
    """Interval of uncertainty: endpoint x with the lowest value and the other endpoint y."""

    stx: float
    fx: float
    dx: float
    sty: float
    fy: float
    dy: float
    brackt: bool = False

    def step(self, stp: float, fp: float, dp: float, stpmin: float, stpmax: float) -> float:
        """Update the interval with trial (stp, fp, dp) and return the next trial."""
        stx, fx, dx = self.stx, self.fx, self.dx
        sty, fy, dy = self.sty, self.fy, self.dy
        sgnd = dp * math.copysign(1.0, dx) if dx != 0.0 else dp

        if fp > fx:
            # Higher value: the minimum is bracketed.
            theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
            s = max(abs(theta), abs(dx), abs(dp))
            gamma = _cubic_gamma(theta, s, dx, dp)
            if stp < stx:
                gamma = -gamma
            p = (gamma - dx) + theta
            q = ((gamma - dx) + gamma) + dp
            stpc = stx + (p / q) * (stp - stx)
            stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx)
            if abs(stpc - stx) < abs(stpq - stx):
                stpf = stpc
            else:
                stpf = stpc + (stpq - stpc) / 2.0
            self.brackt = True
        elif sgnd < 0.0:
            # Derivatives of opposite sign: the minimum is bracketed.
            theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
            s = max(abs(theta), abs(dx), abs(dp))
            gamma = _cubic_gamma(theta, s, dx, dp)
            if stp > stx:
                gamma = -gamma
            p = (gamma - dp) + theta
            q = ((gamma - dp) + gamma) + dx
            stpc = stp + (p / q) * (stx - stp)
            stpq = stp + (dp / (dp - dx)) * (stx - stp)
            stpf = stpc if abs(stpc - stp) > abs(stpq - stp) else stpq
            self.brackt = True
        elif abs(dp) < abs(dx):
            # Same sign, derivative magnitude decreases.
            theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp
            s = max(abs(theta), abs(dx), abs(dp))
            gamma = _cubic_gamma(theta, s, dx, dp)
            if stp > stx:
                gamma = -gamma
            p = (gamma - dp) + theta
            q = (gamma + (dx - dp)) + gamma
            r = p / q if q != 0.0 else 0.0
            if r < 0.0 and gamma != 0.0:
                stpc = stp + r * (stx - stp)
            elif stp > stx:
                stpc = stpmax
            else:
                stpc = stpmin
            stpq = stp + (dp / (dp - dx)) * (stx - stp)
            if self.brackt:
                stpf = stpc if abs(stpc - stp) < abs(stpq - stp) else stpq
                if stp > stx:
                    stpf = min(stp + BISECTION_TRIGGER * (sty - stp), stpf)
                else:
                    stpf = max(stp + BISECTION_TRIGGER * (sty - stp), stpf)
            else:
                stpf = stpc if abs(stpc - stp) > abs(stpq - stp) else stpq
                stpf = min(stpmax, max(stpmin, stpf))
        elif self.brackt:
            # Same sign, derivative magnitude does not decrease.
            theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp
            s = max(abs(theta), abs(dy), abs(dp))
            gamma = _cubic_gamma(theta, s, dy, dp)
            if stp > sty:
                gamma = -gamma
            p = (gamma - dp) + theta
            q = ((gamma - dp) + gamma) + dy
            stpf = stp + (p / q) * (sty - stp)
        else:
            stpf = stpmax if stp > stx else stpmin

        if fp > fx:
            self.sty, self.fy, self.dy = stp, fp, dp
        else:
            if sgnd < 0.0:
                self.sty, self.fy, self.dy = stx, fx, dx
            self.stx, self.fx, self.dx = stp, fp, dp
        return stpf


def strong_wolfe_structured(
    problem: StructuredProblem,
    x: Array,
    p: Array,
    f0: float,
    g0: Array,
    curvature: CurvatureFn,
    cfg: WolfeConfig | None = None,
) -> StepResult:
    """
    Find α satisfying the strong Wolfe conditions and, if required, sᵀu(α) > 0.

    Args:
        problem: Objective to evaluate at trial points
        x: Current iterate
        p: Descent direction
        f0: f(x)
        g0: ∇f(x)
        curvature: Computes u for an accepted trial (see CurvatureFn)
        cfg: Line-search parameters

    Returns:
        StepResult; on status converged
        f(x+αp) ≤ f0 + c1·α·pᵀg0 and |pᵀg(x+αp)| ≤ c2·|pᵀg0|

    Raises:
        NotDescentError: If pᵀg0 ≥ 0
    """
    cfg = cfg or WolfeConfig()
    d0 = float(g0 @ p)
    if not d0 < 0.0:
        raise NotDescentError(f"pᵀg = {d0:.3e} is not negative")

    gtest = cfg.c1 * d0
    interval = _Interval(0.0, f0, d0, 0.0, f0, d0)
    stage_one = True
    width = cfg.alpha_max - cfg.alpha_min
    width1 = 2.0 * width
    stp = cfg.alpha_init
    stmin, stmax = 0.0, stp + cfg.extrapolation * stp
    evals = 0
    rejects = 0
    alpha_hi = math.inf

    while True:
        x_t = x + stp * p
        f = problem.eval_f(x_t)
        g_u = problem.eval_grad_u(x_t)
        g = problem.eval_grad_k(x_t) + g_u
        d = float(g @ p)
        evals += 1
        ftest = f0 + stp * gtest
        s = x_t - x
        if not (math.isfinite(f) and math.isfinite(d)):
            # Overflow at the trial point: retreat towards the best step so far.
            if evals >= cfg.max_evals:
                return StepResult(stp, x_t, f, g, g_u, s, None, evals, LineSearchStatus.MAX_EVALS)
            alpha_hi = stp
            stp = interval.stx + 0.5 * (stp - interval.stx)
            continue

        if stage_one and f <= ftest and d >= 0.0:
            stage_one = False

        if f <= ftest and abs(d) <= -cfg.c2 * d0:
            u = curvature(x_t, s, g, g_u)
            if not cfg.require_structured_curvature or float(s @ u) > 0.0:
                return StepResult(
                    stp, x_t, f, g, g_u, s, u, evals, LineSearchStatus.CONVERGED, rejects
                )
            rejects += 1
            logger.debug(f"🔍 Wolfe point α={stp:.3e} rejected: sᵀu = {float(s @ u):.3e}")

        trial = StepResult(stp, x_t, f, g, g_u, s, None, evals, LineSearchStatus.MAX_EVALS, rejects)
        no_progress = LineSearchStatus.STALLED if f < f0 else LineSearchStatus.NO_DESCENT
        if evals >= cfg.max_evals:
            return trial
        if interval.brackt and (stp <= stmin or stp >= stmax):
            return replace(trial, status=no_progress)
        if interval.brackt and stmax - stmin <= cfg.xtol * stmax:
            return replace(trial, status=no_progress)
        if stp == cfg.alpha_max and f <= ftest and d <= gtest:
            return replace(trial, status=LineSearchStatus.STALLED)
        if stp == cfg.alpha_min and (f > ftest or d >= gtest):
            return replace(trial, status=no_progress)

        if stage_one and f <= interval.fx and f > ftest:
            # Work on ψ so the step is not driven by the sufficient-decrease offset.
            modified = _Interval(
                interval.stx,
                interval.fx - interval.stx * gtest,
                interval.dx - gtest,
                interval.sty,
                interval.fy - interval.sty * gtest,
                interval.dy - gtest,
                interval.brackt,
            )
            stp_next = modified.step(stp, f - stp * gtest, d - gtest, stmin, stmax)
            interval = _Interval(
                modified.stx,
                modified.fx + modified.stx * gtest,
                modified.dx + gtest,
                modified.sty,
                modified.fy + modified.sty * gtest,
                modified.dy + gtest,
                modified.brackt,
            )
        else:
            stp_next = interval.step(stp, f, d, stmin, stmax)

        if interval.brackt:
            if abs(interval.sty - interval.stx) >= BISECTION_TRIGGER * width1:
                stp_next = interval.stx + 0.5 * (interval.sty - interval.stx)
            width1 = width
            width = abs(interval.sty - interval.stx)
            stmin = min(interval.stx, interval.sty)
            stmax = max(interval.stx, interval.sty)
        else:
            stmin = stp_next + XTRAP_LOWER * (stp_next - interval.stx)
            stmax = stp_next + cfg.extrapolation * (stp_next - interval.stx)

        stp = min(max(stp_next, cfg.alpha_min), cfg.alpha_max)
        if stp >= alpha_hi:
            stp = interval.stx + 0.5 * (alpha_hi - interval.stx)
        if interval.brackt and (
            stp <= stmin or stp >= stmax or stmax - stmin <= cfg.xtol * stmax
        ):
            stp = interval.stx
