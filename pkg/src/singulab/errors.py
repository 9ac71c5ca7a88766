"""Exception hierarchy shared across the package."""


class SingulabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SingulabError):
    """A model parameter is outside its admissible range."""


class InputError(SingulabError):
    """An operation was called with malformed or insufficient input."""


class NumericalError(SingulabError):
    """A computation lost numerical meaning (underflow, non-finite ratio, ...)."""


class UnsupportedMethodError(SingulabError):
    """The requested method does not apply to these inputs."""


class InsufficientDataError(SingulabError):
    """Too few usable points survived filtering to produce a fit."""


class ConfigError(SingulabError):
    """An experiment configuration failed validation."""


class ReplicationFailureError(SingulabError):
    """More than the tolerated fraction of replications raised."""
