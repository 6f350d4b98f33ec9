"""Objective interface: combined function-gradient evaluation with exact counting.

Every problem exposes a single ``evaluate(x) -> (f, grad)``.  There is no
function-only entry point, so one call is one unit of work and the counter
is unambiguous.  All solvers route their evaluations through
``evaluate_counted``; the reported evaluation counts are therefore exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidSpec, NumericalFailure

Vector = np.ndarray
EvaluateFn = Callable[[Vector], "tuple[float, Vector]"]


@dataclass(frozen=True)
class ObjectiveProblem:
    """A smooth convex objective with curvature metadata.

    ``default_L`` is an upper bound on the Hessian spectrum (smoothness
    modulus) and ``default_ell`` a lower bound (strong-convexity modulus,
    0 for merely convex).  ``evaluate`` must be deterministic and return the
    value and gradient together.  ``known_xstar``/``known_fstar`` are
    optional exact-solution metadata used by tests and bound checks.
    """

    name: str
    n: int
    evaluate: EvaluateFn
    default_L: float
    default_ell: float = 0.0
    known_xstar: Vector | None = None
    known_fstar: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec(f"dimension must be positive, got {self.n}")
        if not self.default_L > 0:
            raise InvalidSpec(f"default_L must be positive, got {self.default_L}")
        if not 0.0 <= self.default_ell <= self.default_L:
            raise InvalidSpec(
                f"need 0 <= ell <= L, got ell={self.default_ell}, L={self.default_L}"
            )


@dataclass
class EvalCounter:
    """Counts combined function-gradient evaluations for a single run."""

    count: int = 0


def evaluate_counted(
    problem: ObjectiveProblem, x: Vector, counter: EvalCounter
) -> tuple[float, Vector]:
    """Evaluate ``problem`` at ``x``, incrementing ``counter`` by exactly one.

    Raises ``NumericalFailure`` if the value or any gradient entry is
    non-finite, so an overflowing evaluation aborts the run with a distinct
    status instead of silently poisoning it.
    """
    f, g = problem.evaluate(x)
    counter.count += 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericalFailure(f"non-finite evaluation in problem {problem.name!r}")
    return float(f), g


def finite_diff_gradient(problem: ObjectiveProblem, x: Vector, h: float) -> Vector:
    """Central-difference gradient, used as a test oracle.

    Costs 2n raw (uncounted) evaluations: (f(x + h e_i) - f(x - h e_i)) / 2h
    per coordinate.
    """
    if not h > 0:
        raise InvalidSpec(f"step h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp, _ = problem.evaluate(x + e)
        fm, _ = problem.evaluate(x - e)
        g[i] = (fp - fm) / (2.0 * h)
    return g
