class FockwitError(Exception):
    """Base class for all errors raised by fockwit."""


class SpecParseError(FockwitError, ValueError):
    """A state specification string could not be parsed."""

    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class DomainError(FockwitError, ValueError):
    """A parameter lies outside the domain of the operation."""


class UnsupportedOrderingError(DomainError):
    """The ordering parameter is too close to normal ordering for a QPD."""


class NonpositiveMapError(DomainError):
    """The requested local map is not positive."""


class DegenerateLossError(DomainError):
    """Both interferometer arms are fully lossy."""


class DimensionMismatchError(FockwitError, ValueError):
    """Operands live on incompatible truncated spaces."""


class InvalidSubsetError(FockwitError, ValueError):
    """A basis index subset is not closed under (i, j) -> (j, i)."""


class TruncationError(FockwitError):
    """The Fock cutoff is too small for the requested state."""


class NumericalGuardError(FockwitError):
    """A numerical accuracy guard was violated."""


class DegenerateBasisError(NumericalGuardError):
    """The Gram matrix of an operator basis is singular or ill conditioned."""


class GridTooSmallError(NumericalGuardError):
    """The quadrature integrand has not decayed at the grid boundary."""


class ImaginaryDefectError(NumericalGuardError):
    """A quantity that must be real carries a large imaginary part."""


class TruncationWarning(UserWarning):
    """Emitted when a state loses noticeable weight to the Fock cutoff."""
