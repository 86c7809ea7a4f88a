"""Exception types raised by soblab."""


class SoblabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SoblabError, ValueError):
    """Inputs are inconsistent with each other (dimension mismatch, bad schema)."""


class ParameterError(SoblabError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class UnsupportedInputError(SoblabError, ValueError):
    """The input is valid but outside what the computation can handle."""
