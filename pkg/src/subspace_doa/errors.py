"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
configuration/usage problems (exit 1) and numerical failures (exit 2).
"""


class DoaError(Exception):
    """Base class for all package errors."""


class InvalidParameter(DoaError, ValueError):
    pass


class InvalidScenario(InvalidParameter):
    pass


class DimensionMismatch(DoaError, ValueError):
    pass


class FormatError(DoaError, ValueError):
    """Malformed snapshot/spectrum file or config."""


class NumericalError(DoaError, ArithmeticError):
    """Base for failures of the numerical pipeline."""


class NotHermitian(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class NonPSDProjector(NumericalError):
    pass
