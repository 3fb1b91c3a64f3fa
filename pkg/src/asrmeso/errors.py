"""Exception hierarchy. CLI exit codes hang off these classes."""


class AsrMesoError(Exception):
    exit_code = 1


class ConfigurationError(AsrMesoError, ValueError):
    exit_code = 2


class CalibrationError(ConfigurationError):
    """A material parameter cannot be calibrated to the requested target."""


class StepError(AsrMesoError, ValueError):
    """Invalid time-step input to a constitutive update."""

    exit_code = 3


class NumericalFailure(AsrMesoError, RuntimeError):
    """Solver divergence (NaN or kinetic-energy blow-up)."""

    exit_code = 3


class PackingSaturationError(AsrMesoError, RuntimeError):
    exit_code = 4

    def __init__(self, message, achieved_fraction):
        super().__init__(message)
        self.achieved_fraction = achieved_fraction
