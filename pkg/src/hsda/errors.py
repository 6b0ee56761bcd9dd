"""Exception types shared across the solver stack."""


class SolverError(Exception):
    """Base class for all solver-level failures."""


class NonConvergence(SolverError):
    """Inner linear solve missed its residual target within the iteration cap.

    Usually indicates mis-specified strong-concavity or smoothness constants.
    """


class DimensionTooLarge(SolverError):
    """Dense materialization was requested above the configured size limit."""


class NumericalOverflow(SolverError):
    """Iterates blew past the overflow guard; step size or concavity is wrong."""


class EigensolverFailure(SolverError):
    """The dense symmetric eigendecomposition did not converge."""


class MaxItersExceeded(SolverError):
    """Lanczos ran out of iterations before certifying its accuracy budget.

    Carries the best Ritz pair found so callers can decide whether to use it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RetryBudgetExceeded(SolverError):
    """The safeguard loop re-solved too many times without certifying.

    Signals a gradient bound that is too small for the trajectory, or a
    persistently failing eigensolve.
    """


class ConstructionError(SolverError):
    """A problem instance violates its own well-posedness requirements."""


class ConfigError(SolverError):
    """Malformed or unknown experiment configuration."""


class MismatchedProblem(SolverError):
    """Traces handed to a comparison were not produced on the same problem."""
