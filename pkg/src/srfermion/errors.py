"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class SectorEmptyError(DomainError):
    """Charge sector whose weight is below the reporting threshold."""


class UsageError(ValueError):
    """Operation called in a way it does not support."""


class ComputationError(RuntimeError):
    """Numerical kernel failed (e.g. eigensolver or sanity threshold)."""


class AccuracyError(ArithmeticError):
    """Requested accuracy not reached.

    The best available estimate and its error bound are attached so callers
    can decide whether to use it anyway.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
