"""Exception hierarchy shared by every module in the package."""


class DistRejError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DistRejError, ValueError):
    """Invalid parameters, mismatched filter banks, malformed scenario files."""


class InvalidStateError(DistRejError, ValueError):
    """Non-finite or mis-shaped joint state handed to a dynamics routine."""


class MeasurementError(DistRejError, ValueError):
    """Non-finite sensor measurement; the consuming state is left untouched."""


class SingularDynamicsError(DistRejError, ArithmeticError):
    """Mass matrix is numerically singular (condition number above 1e12)."""


class DivergenceError(DistRejError, ArithmeticError):
    """Closed-loop simulation blew up."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"simulation diverged at step {step}")


class ComparisonError(DistRejError, ValueError):
    """Two reports that cannot be compared (different scenario or joint count)."""


class TraceFileError(DistRejError, OSError):
    """Trace or report could not be written."""
