"""Exception types shared across the solvers and problem constructors."""


class SolverError(Exception):
    """Base class for solver-side failures."""


class NumericalFailure(SolverError):
    """An evaluation produced a non-finite value (overflow or NaN)."""


class InvalidState(SolverError):
    """An internal algebraic invariant was violated; indicates a bug or bad input."""


class CurvatureFailure(SolverError):
    """A directional curvature estimate came out nonpositive.

    Carries the probe evaluation, when one was made, so the caller can still
    honour a termination test at the probe point.
    """

    def __init__(self, message, tilde_x=None, tilde_f=None, tilde_g=None):
        super().__init__(message)
        self.tilde_x = tilde_x
        self.tilde_f = tilde_f
        self.tilde_g = tilde_g


class DegenerateDirection(SolverError):
    """A direction-update denominator vanished; restart with steepest descent."""


class NotPositiveDefinite(SolverError):
    """The operator handed to the linear CG solver is not positive definite."""


class InvalidSpec(ValueError):
    """A problem or run specification is malformed."""
