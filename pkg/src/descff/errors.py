"""Exception hierarchy shared by all modules."""


class DescffError(Exception):
    """Base class for library errors."""


class DomainError(DescffError, ValueError):
    """Input outside the domain of an operation (zero argument, bad level...)."""


class PoleError(DomainError):
    """Evaluation hit a pole of the kernel f or of a Gamma factor."""


class DegenerateParameterError(DomainError):
    """Parameter a sits on the degeneracy lattice a = +-p/2, +-(1+p)/2 (mod 1)."""


class ConvergenceError(DescffError, ArithmeticError):
    """A numerical procedure did not reach its target accuracy.

    The achieved error estimate is kept in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class FitError(DescffError, ArithmeticError):
    """A least-squares or Laurent fit left a residual above tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
