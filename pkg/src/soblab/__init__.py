"""soblab: a numerical laboratory for weighted Sobolev and isoperimetric inequalities."""
from .errors import ConfigurationError, ParameterError, SoblabError, UnsupportedInputError
from .measures import Ball, Cube, GridField, LebesgueMeasure, PointMeasure

__version__ = "0.1.0"

__all__ = ["Ball", "Cube", "GridField", "LebesgueMeasure", "PointMeasure",
           "SoblabError", "ConfigurationError", "ParameterError", "UnsupportedInputError"]
