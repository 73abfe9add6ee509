"""Exception hierarchy for the QME toolkit."""


class QmeError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(QmeError, ValueError):
    """A parameter violates an operation's precondition."""


class GridMismatchError(InvalidArgumentError):
    """Fields, ROI or base were built on incompatible grids or bases."""


class EmptyBaseError(QmeError, RuntimeError):
    """No intensity eigenmode passed the retention threshold."""


class UnsupportedKernelError(QmeError, TypeError):
    """The requested measure kernel needs a vector basis."""


class UndefinedMeasureError(QmeError, ArithmeticError):
    """The measure is undefined, e.g. zero intensity inside the ROI."""


class BundleFormatError(QmeError, OSError):
    """A bundle, matrix or raster file is unreadable or malformed."""
