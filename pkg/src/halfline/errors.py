"""Exception hierarchy shared by all modules."""


class HalflineError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HalflineError, ValueError):
    """An argument violates the precondition of an operation."""


class NumericalError(HalflineError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class ConvergenceError(NumericalError):
    """A series or quadrature did not converge."""


class TruncationError(NumericalError):
    """A truncation (series cut, integration cutoff) exceeds its tolerance."""


class TailBoundError(TruncationError):
    """The truncation radius of a half-line quadrature is too small."""


class GridMismatchError(HalflineError, ValueError):
    """Two kernel matrices live on different quadrature grids."""


class RepresentationError(NumericalError, OverflowError):
    """A result is not representable in double precision."""
