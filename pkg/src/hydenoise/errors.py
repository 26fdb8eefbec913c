"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: parameter/shape errors -> 2,
data/format errors -> 3, method failures -> 4.
"""


class HydeError(Exception):
    """Base class for all library errors."""


class ParameterError(HydeError, ValueError):
    """An argument is outside its allowed range."""


class ShapeError(HydeError, ValueError):
    """Array or cube dimensions are inconsistent."""


class DataError(HydeError, ValueError):
    """Input data is unusable (non-finite values, empty signal, ...)."""


class FormatError(DataError):
    """A file header is missing, unreadable or malformed."""


class IntegrityError(FormatError):
    """Header and payload disagree (e.g. payload size)."""


class MethodError(HydeError, RuntimeError):
    """A denoising method failed while running."""
