"""Exception types raised across the package."""


class ChemofluxError(Exception):
    """Base class for all package errors."""


class MeshError(ChemofluxError, ValueError):
    pass


class IllConditionedError(ChemofluxError, ValueError):
    """Tridiagonal system is not strictly diagonally dominant."""


class AssumptionError(ChemofluxError, ValueError):
    """Model parameters or functions violate a standing assumption."""


class DivergenceError(ChemofluxError, FloatingPointError):
    """A time step produced a non-finite value."""

    def __init__(self, message, field=None, step=None, t=None):
        super().__init__(message)
        self.field = field
        self.step = step
        self.t = t


class NoSteadyStateError(ChemofluxError, RuntimeError):
    pass


class BoundUnavailableError(ChemofluxError, ValueError):
    """A model function has no finite supremum."""


class ConfigError(ChemofluxError, ValueError):
    pass
