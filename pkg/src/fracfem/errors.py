"""Exception types shared by all solver components."""


class FracFemError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FracFemError):
    """An argument violates a precondition (bad range, mesh mismatch, ...)."""


class SingularityError(FracFemError):
    """A requested integral is not integrable in the given configuration."""


class IndefiniteOperatorError(FracFemError):
    """A factorization requiring positive definiteness failed."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ConvergenceError(FracFemError):
    """An iteration exhausted its budget; carries the best iterate found."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegenerationError(ConvergenceError):
    """An iterate lost a structural property (e.g. its sign change)."""
