"""Exception hierarchy shared by all qresponse modules."""


class QResponseError(Exception):
    """Base class for every error raised by this package."""


class FormatError(QResponseError, ValueError):
    """Malformed input file (missing header field, bad token, ...)."""


class BoundsError(QResponseError, IndexError):
    """Orbital index outside the declared range."""


class ConflictError(QResponseError, ValueError):
    """Two inequivalent values given for the same canonical matrix element."""


class DomainError(QResponseError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ResourceError(QResponseError, MemoryError):
    """Requested object would exceed the configured memory budget."""


class ConvergenceError(QResponseError, RuntimeError):
    """Iterative eigensolver failed to reach the residual tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateGroundStateError(QResponseError, RuntimeError):
    """The ground state is degenerate; response pipelines require a unique one."""


class SectorRequiredError(QResponseError, KeyError):
    """Eigen data for a particle-number sector is needed but was not supplied."""

    def __str__(self):
        return Exception.__str__(self)


class AssemblyError(QResponseError, KeyError):
    """A block needed to assemble a response component is missing."""

    def __str__(self):
        return Exception.__str__(self)


class ConfigurationError(QResponseError, ValueError):
    """Inconsistent gate or circuit configuration."""
