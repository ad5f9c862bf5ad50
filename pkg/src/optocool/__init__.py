"""Radiation-pressure cooling of a mechanical oscillator in a driven optical cavity."""

from .errors import ConfigError, NumericalError, OptocoolError
from .params import ModelParams, coupling_alpha, from_si, normalize

__all__ = [
    "ConfigError",
    "ModelParams",
    "NumericalError",
    "OptocoolError",
    "coupling_alpha",
    "from_si",
    "normalize",
]
__version__ = "0.1.0"
