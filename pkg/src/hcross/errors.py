"""Exception types raised across the package."""


class HCrossError(Exception):
    """Base class for all package errors."""


class CapacityError(HCrossError, MemoryError):
    """An enumeration or grid would exceed the configured size cap."""


class AliasingError(HCrossError, ValueError):
    """A grid resolution cannot represent the requested frequencies."""


class ParameterError(HCrossError, ValueError):
    """Smoothness or budget parameters violate their admissible range."""


class DegenerateFitError(HCrossError, ValueError):
    """The rate-fit design matrix is rank deficient on the data window."""


class UnknownFunctionError(HCrossError, KeyError):
    """A test-function name is not in the registry."""
