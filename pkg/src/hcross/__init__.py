"""Hyperbolic-cross approximation laboratory for periodic functions of small mixed smoothness."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AliasingError,
    CapacityError,
    DegenerateFitError,
    HCrossError,
    ParameterError,
    UnknownFunctionError,
)
from .polynomial import GridFunction, TrigPolynomial  # noqa: E402

__all__ = [
    "AliasingError",
    "CapacityError",
    "DegenerateFitError",
    "GridFunction",
    "HCrossError",
    "ParameterError",
    "TrigPolynomial",
    "UnknownFunctionError",
]
