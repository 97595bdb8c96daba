"""Exception types shared across the package."""


class KpcaCamError(Exception):
    """Base class for all package errors."""


class NpyFormatError(KpcaCamError):
    """File is not a valid NPY v1/v2 file."""


class NpyLayoutError(KpcaCamError):
    """NPY file uses an unsupported memory layout (Fortran order)."""


class NpyDtypeError(KpcaCamError):
    """NPY file stores an element type we do not read."""


class InputError(KpcaCamError):
    """Caller-supplied data violates a precondition."""


class ConfigError(KpcaCamError):
    """Invalid or inconsistent configuration."""


class BackendError(KpcaCamError):
    """Inference backend failed to load or execute."""


class ConvergenceError(KpcaCamError):
    """Iterative solver did not reach tolerance within its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
