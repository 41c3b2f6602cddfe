"""Exception types raised by the estimators."""


class TailDepError(Exception):
    """Base class for computation errors in this package."""


class InfeasibleError(TailDepError, ValueError):
    """A constrained estimator has no feasible solution for the given input."""


class DegenerateError(TailDepError, ValueError):
    """The input carries no information for the requested estimate."""


class ConvergenceError(TailDepError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""
