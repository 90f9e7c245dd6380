"""Exception types shared across the package."""


class VesselflowError(Exception):
    """Base class for simulator errors."""


class ConfigError(VesselflowError):
    """Invalid or malformed run configuration."""


class SolverError(VesselflowError):
    """Iterative solver failed to converge.

    Carries the residual history so the failure is diagnosable.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class PositivityError(VesselflowError):
    """Total temperature dropped below the positivity floor.

    The run is invalid (dt or grid too coarse); values are never clipped.
    """

    def __init__(self, message, location=None, value=None):
        super().__init__(message)
        self.location = location
        self.value = value


class BlowUpError(VesselflowError):
    """Non-finite values detected during time integration."""
