"""Exception hierarchy shared by all modules."""


class MatorderError(Exception):
    """Base class for every error raised by this package."""


class NonHermitianError(MatorderError, ValueError):
    """A matrix expected to be Hermitian failed the hermiticity pre-check."""


class NonFiniteError(MatorderError, ValueError):
    """An input contains NaN or infinite entries."""


class DimensionMismatchError(MatorderError, ValueError):
    """Operand shapes are incompatible."""


class BaseSpaceMismatchError(MatorderError, ValueError):
    """Two elements live over different base spaces."""


class WrongBaseModelError(MatorderError, ValueError):
    """The operation needs a different base-space model (e.g. Schatten)."""


ModelMismatchError = WrongBaseModelError


class InvalidPError(MatorderError, ValueError):
    """A Schatten or lattice exponent lies outside ``[1, inf]``."""


class KindMismatchError(MatorderError, ValueError):
    """The matricial structure kind does not support the operation."""


class NonHermitianInputError(MatorderError, ValueError):
    """A leveled element expected to be hermitian is not."""


class NoWitnessFoundError(MatorderError, RuntimeError):
    """An optimization path exhausted its budget without a valid witness."""


class NotCompletelyPositiveError(MatorderError, ValueError):
    """A map sent a sampled cone member outside the target cone."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MatrixFamilyNotFoundError(MatorderError, RuntimeError):
    """No suitable family of symmetric orthogonal matrices was found."""


class InfeasibleError(MatorderError, RuntimeError):
    """No feasible positive completion was found."""


class UnknownExperimentError(MatorderError, KeyError):
    """The requested experiment is not registered."""
