"""Exception types raised by the numerical routines."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical routine (as opposed to bad input)."""


class NotPSDError(NumericalError):
    """A matrix expected to be positive semidefinite has a genuinely negative spectrum."""


class NotPDError(NumericalError):
    """Cholesky factorization hit a non-positive pivot."""


class DivergenceError(NumericalError):
    """An iterate became non-finite (overflow/NaN)."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class CollinearBasisError(NumericalError):
    """The basis Gram matrix is singular or numerically rank deficient."""


class AggregateInvalidError(NumericalError):
    """Too many replicate failures for the aggregate statistics to be meaningful."""
