"""Comparison solvers: linear CG, plain Hager-Zhang NCG, and accelerated gradient.

Evaluation accounting follows the same convention everywhere: for the
nonlinear solvers one combined function-gradient evaluation is the unit,
counted through the shared oracle; for linear CG each operator application
counts as one evaluation, since applying A is the whole cost of an
iteration on a quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cag import hz_beta, secant_alpha
from .errors import (
    CurvatureFailure,
    DegenerateDirection,
    InvalidSpec,
    NotPositiveDefinite,
    NumericalFailure,
)
from .estimate_sequence import advance_estimate, compute_theta_gamma, init_estimate
from .oracle import EvalCounter, ObjectiveProblem, Vector, evaluate_counted
from .results import SolverResult, Status, StepKind, TraceRecord

ApplyFn = Callable[[Vector], Vector]


@dataclass(frozen=True)
class QuadraticProblem:
    """Quadratic objective f(x) = x^T A x / 2 - b^T x given as an SPD operator."""

    apply_A: ApplyFn
    b: Vector
    known_fstar: float | None = None
    known_xstar: Vector | None = None
    name: str = "quadratic"

    @property
    def n(self) -> int:
        return self.b.size

    def objective(self, L: float, ell: float = 0.0, name: str | None = None) -> ObjectiveProblem:
        """Wrap the operator as a counted function-gradient oracle.

        One evaluate call applies A once: f = x^T(Ax)/2 - b^T x,
        grad = Ax - b.
        """
        apply_A, b = self.apply_A, self.b

        def evaluate(x):
            Ax = apply_A(x)
            return 0.5 * float(x @ Ax) - float(b @ x), Ax - b

        return ObjectiveProblem(
            name=name or self.name,
            n=self.n,
            evaluate=evaluate,
            default_L=L,
            default_ell=ell,
            known_xstar=self.known_xstar,
            known_fstar=self.known_fstar,
        )


def lcg_minimize(
    qp: QuadraticProblem,
    x0: Vector,
    gtol: float,
    max_iters: int,
    record_iterates: bool = False,
) -> SolverResult:
    """Linear conjugate gradient with the classical residual recurrences.

    One A-application per iteration, counted as one evaluation; the initial
    residual is free for x0 = 0 and costs one application otherwise.  The
    objective value is tracked by the update f_{k+1} = f_k - (alpha/2) r^T r,
    which is exact in exact arithmetic.
    """
    x = np.array(x0, dtype=float, copy=True)
    evals = 0
    if np.any(x != 0.0):
        Ax0 = qp.apply_A(x)
        evals += 1
        r = qp.b - Ax0
        f = 0.5 * float(x @ Ax0) - float(qp.b @ x)
    else:
        r = qp.b.copy()
        f = 0.0
    rr = float(r @ r)
    rnorm = math.sqrt(rr)
    trace = [TraceRecord(0, evals, f, rnorm, math.nan, StepKind.INIT)]
    iterates = [x.copy()] if record_iterates else None
    if rnorm <= gtol:
        return SolverResult(Status.CONVERGED, x, f, rnorm, 0, evals, trace, iterates)

    p = r.copy()
    for k in range(1, max_iters + 1):
        Ap = qp.apply_A(p)
        evals += 1
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotPositiveDefinite(f"p^T A p = {pAp!r} <= 0")
        alpha = rr / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        f = f - 0.5 * alpha * rr
        rr_new = float(r @ r)
        rnorm = math.sqrt(rr_new)
        trace.append(TraceRecord(k, evals, f, rnorm, math.nan, StepKind.LCG))
        if iterates is not None:
            iterates.append(x.copy())
        if rnorm <= gtol:
            return SolverResult(Status.CONVERGED, x, f, rnorm, k, evals, trace, iterates)
        p = r + (rr_new / rr) * p
        rr = rr_new

    return SolverResult(
        Status.BUDGET_EXHAUSTED, x, f, rnorm, max_iters, evals, trace, iterates
    )


def ncg_minimize(
    problem: ObjectiveProblem,
    x0: Vector,
    gtol: float,
    max_evals: int,
    record_iterates: bool = False,
) -> SolverResult:
    """Plain Hager-Zhang NCG with the secant line search and a backtracking safeguard.

    No progress test and no fallback: the secant step (probe scale taken
    from the problem's smoothness bound) is halved until the function value
    decreases, up to 30 times, after which the run stops with
    ``LINE_SEARCH_FAILURE``.  Restarts to steepest descent every 10n + 1
    steps and whenever the direction stops being a descent direction.
    """
    x = np.asarray(x0, dtype=float)
    L = problem.default_L
    counter = EvalCounter()
    trace: list[TraceRecord] = []
    iterates: list[np.ndarray] | None = [x] if record_iterates else None

    def finish(status, xf, ff, gn, k):
        return SolverResult(status, xf, ff, gn, k, counter.count, trace, iterates)

    try:
        f, g = evaluate_counted(problem, x, counter)
    except NumericalFailure:
        raise InvalidSpec("starting point evaluation failed")
    gnorm = float(np.linalg.norm(g))
    g0_norm = gnorm
    trace.append(TraceRecord(0, counter.count, f, gnorm, math.nan, StepKind.INIT))
    if gnorm <= gtol:
        return finish(Status.CONVERGED, x, f, gnorm, 0)

    p = -g
    i_cg = 0
    restart_at = 10 * problem.n + 1
    best = (x, f, gnorm)
    k = 0
    try:
        while counter.count < max_evals:
            if i_cg >= restart_at or float(g @ p) >= 0.0:
                p = -g
                i_cg = 0
            try:
                alpha, _, _, g_tilde, f_tilde = secant_alpha(problem, counter, x, f, g, p, L)
                if np.linalg.norm(g_tilde) <= gtol:
                    k += 1
                    gn = float(np.linalg.norm(g_tilde))
                    trace.append(TraceRecord(k, counter.count, f_tilde, gn, math.nan, StepKind.CG))
                    return finish(Status.CONVERGED, x + p / L, f_tilde, gn, k)
            except CurvatureFailure as exc:
                if exc.tilde_g is not None and np.linalg.norm(exc.tilde_g) <= gtol:
                    k += 1
                    gn = float(np.linalg.norm(exc.tilde_g))
                    trace.append(
                        TraceRecord(k, counter.count, exc.tilde_f, gn, math.nan, StepKind.CG)
                    )
                    return finish(Status.CONVERGED, exc.tilde_x, exc.tilde_f, gn, k)
                # Flat or concave along p: fall back to the step that the
                # smoothness bound alone guarantees to decrease f.
                alpha = -float(g @ p) / (L * float(p @ p))

            x_next = x + alpha * p
            f_next, g_next = evaluate_counted(problem, x_next, counter)
            # Near the minimum the true decrease falls below what doubles can
            # represent, so demand decrease only up to a rounding-level slack.
            f_accept = f + 1e-12 * (1.0 + abs(f))
            backtracks = 0
            while f_next > f_accept and backtracks < 30:
                if np.linalg.norm(g_next) <= gtol:
                    break
                alpha *= 0.5
                x_next = x + alpha * p
                f_next, g_next = evaluate_counted(problem, x_next, counter)
                backtracks += 1
            gnorm_next = float(np.linalg.norm(g_next))
            if f_next > f_accept and gnorm_next > gtol:
                return finish(Status.LINE_SEARCH_FAILURE, *best, k)

            k += 1
            trace.append(
                TraceRecord(k, counter.count, f_next, gnorm_next, math.nan, StepKind.CG)
            )
            if iterates is not None:
                iterates.append(x_next)
            if f_next < best[1]:
                best = (x_next, f_next, gnorm_next)
            if gnorm_next <= gtol:
                return finish(Status.CONVERGED, x_next, f_next, gnorm_next, k)

            try:
                beta = hz_beta(g, g_next, p, g0_norm)
            except DegenerateDirection:
                beta = 0.0
            p = -g_next + beta * p
            i_cg = 0 if beta == 0.0 else i_cg + 1
            x, f, g = x_next, f_next, g_next
    except NumericalFailure:
        return finish(Status.DIVERGED, *best, k)

    return finish(Status.BUDGET_EXHAUSTED, *best, k)


def ag_minimize(
    problem: ObjectiveProblem,
    x0: Vector,
    L: float,
    ell: float,
    gtol: float,
    max_evals: int,
    record_iterates: bool = False,
) -> SolverResult:
    """Accelerated gradient with the estimate-sequence bookkeeping.

    Each iteration evaluates once, at the combination point
    bar_x = (theta gamma v + gamma_next x) / (gamma + theta ell), takes the
    gradient step x_next = bar_x - bar_g / L and advances the model anchored
    at bar_x.  Termination is tested at the combination point, the only
    point whose gradient is computed.
    """
    x = np.asarray(x0, dtype=float)
    counter = EvalCounter()
    trace: list[TraceRecord] = []
    iterates: list[np.ndarray] | None = [x] if record_iterates else None

    f0, g0 = evaluate_counted(problem, x, counter)
    gnorm = float(np.linalg.norm(g0))
    trace.append(TraceRecord(0, counter.count, f0, gnorm, f0, StepKind.INIT))
    if gnorm <= gtol:
        return SolverResult(Status.CONVERGED, x, f0, gnorm, 0, counter.count, trace, iterates)

    est = init_estimate(f0, x, L, ell)
    best = (x, f0, gnorm)
    k = 0
    try:
        while counter.count < max_evals:
            theta, gamma_next = compute_theta_gamma(L, ell, est.gamma)
            bar_x = (theta * est.gamma * est.v + gamma_next * x) / (
                est.gamma + theta * ell
            )
            bar_f, bar_g = evaluate_counted(problem, bar_x, counter)
            bar_gnorm = float(np.linalg.norm(bar_g))
            if bar_gnorm <= gtol:
                k += 1
                trace.append(
                    TraceRecord(k, counter.count, bar_f, bar_gnorm, est.phi_star, StepKind.AG)
                )
                if iterates is not None:
                    iterates.append(bar_x)
                return SolverResult(
                    Status.CONVERGED, bar_x, bar_f, bar_gnorm, k, counter.count, trace, iterates
                )
            x = bar_x - bar_g / L
            est = advance_estimate(est, theta, gamma_next, bar_x, bar_f, bar_g)
            k += 1
            trace.append(
                TraceRecord(k, counter.count, bar_f, bar_gnorm, est.phi_star, StepKind.AG)
            )
            if iterates is not None:
                iterates.append(x)
            if bar_f < best[1]:
                best = (bar_x, bar_f, bar_gnorm)
    except NumericalFailure:
        return SolverResult(Status.DIVERGED, *best, k, counter.count, trace, iterates)

    return SolverResult(Status.BUDGET_EXHAUSTED, *best, k, counter.count, trace, iterates)
