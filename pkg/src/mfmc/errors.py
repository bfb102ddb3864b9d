class MfmcError(Exception):
    """Base class for library errors."""


class ConfigError(MfmcError, ValueError):
    """Invalid parameters or configuration."""


class DomainError(MfmcError, ValueError):
    """Argument outside the domain of a formula."""


class GridError(MfmcError, ValueError):
    """Signals or kernels live on incompatible time grids."""


class NumericError(MfmcError, RuntimeError):
    """A numerical procedure failed to converge or lost accuracy."""

    def __init__(self, msg, **diagnostics):
        super().__init__(msg)
        self.diagnostics = diagnostics


class ConvergenceError(NumericError):
    """A signal did not settle to a plateau."""


class AlignmentError(NumericError):
    """Streams that must meet in step arrive at different times."""
