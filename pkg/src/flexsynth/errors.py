"""Exception hierarchy shared by all flexsynth modules."""


class FlexSynthError(Exception):
    """Base class for every error raised by the package."""


class ModelError(FlexSynthError):
    """Structural model violates an invariant (asymmetry, non-PD mass, ...)."""


class ModelFileError(ModelError):
    """Model file could not be parsed or validated."""


class DimensionError(FlexSynthError, ValueError):
    """Array shapes do not agree."""


class DegenerateGeometryError(FlexSynthError, ValueError):
    """Collinear markers or rank-deficient rigid-mode geometry."""


class ConfigError(FlexSynthError, ValueError):
    """Simulation configuration rejected by validation."""


class NumericalError(FlexSynthError, ArithmeticError):
    """Eigen-solve failure or other numerical breakdown."""


class RebaseRequired(NumericalError):
    """Log-rotation angle too close to 2*pi for the dexp-inverse."""


class DivergenceError(NumericalError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time
        # records up to the last good step, when the caller can provide them
        self.partial = None
