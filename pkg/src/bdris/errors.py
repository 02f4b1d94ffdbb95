"""Exception types raised by the package."""


class BDRISError(Exception):
    """Base class for all package errors."""


class DimensionError(BDRISError, ValueError):
    """Operand shapes are incompatible."""


class DegenerateInputError(BDRISError, ValueError):
    """Input is degenerate (e.g. all zeros) for the requested operation."""


class ConfigurationError(BDRISError, ValueError):
    """A design/algorithm configuration fails the identifiability checks.

    The failing :class:`~bdris.design.ValidationReport` is attached as
    ``report`` when one is available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalFailure(BDRISError, ArithmeticError):
    """An iterative routine produced non-finite values."""
