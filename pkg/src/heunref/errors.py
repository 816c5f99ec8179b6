"""Exception hierarchy shared by every heunref module."""

from __future__ import annotations


class HeunRefError(Exception):
    """Base class for all errors raised by heunref."""


class ParameterDomainError(HeunRefError, ValueError):
    """Parameters outside the set where a function is defined."""


class DegenerateParameterError(ParameterDomainError):
    """Parameters hit a degenerate case (vanishing leading coefficient, zero exponent gap...)."""


class ConstraintError(ParameterDomainError):
    """A catalog constraint is violated; ``constraint`` names it."""

    def __init__(self, identity: str, constraint: str, detail: str = ""):
        self.identity = identity
        self.constraint = constraint
        msg = f"{identity}: constraint violated: {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DomainError(HeunRefError, ValueError):
    """Argument outside the region where the evaluation is trusted."""


class BranchError(DomainError):
    """Negative base raised to a non-integer power under strict evaluation."""


class IntervalError(DomainError):
    """A verification interval contains a singularity or is otherwise unusable."""


class ConvergenceError(HeunRefError, RuntimeError):
    """An iterative procedure failed to converge; ``partial`` carries the last estimate."""

    def __init__(self, msg: str, partial=None, error=None):
        super().__init__(msg)
        self.partial = partial
        self.error = error


class PropagationError(HeunRefError, RuntimeError):
    """The ODE integrator could not propagate a solution along the requested path."""


class EmptyPlanError(HeunRefError):
    """Every parameter draw of a sample plan was excluded."""


class ConfigError(HeunRefError, ValueError):
    """Invalid run configuration."""
