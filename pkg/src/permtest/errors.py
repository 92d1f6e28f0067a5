"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so raising the right one
matters more than usual.
"""


class PermtestError(Exception):
    """Base class for all package errors."""


class ParameterError(PermtestError, ValueError):
    """An argument is outside its documented range or inconsistent."""


class DimensionError(PermtestError, ValueError):
    """Two objects that must share a domain size do not."""


class ConstructionError(PermtestError, ValueError):
    """An instance family cannot be built at the requested size."""


class FileFormatError(PermtestError, ValueError):
    """An input file does not parse or violates its schema."""


class SearchBudgetError(PermtestError, RuntimeError):
    """An exhaustive search ran out of budget without a result."""


class VerificationError(PermtestError, AssertionError):
    """An exact construction check failed."""
