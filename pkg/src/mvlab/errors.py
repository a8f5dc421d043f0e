"""Exception hierarchy shared by every mvlab module."""


class MVLabError(Exception):
    """Base class for all errors raised by mvlab."""


class InvalidConfigurationError(MVLabError, ValueError):
    """A parameter violates a documented precondition."""


class IncompatibleGridsError(MVLabError, ValueError):
    """Two objects that must share a grid do not."""


class StepRejectedError(MVLabError):
    """The requested time step exceeds the stability bound.

    Attributes
    ----------
    admissible_dt : float
        Largest time step accepted for the current state.
    """

    def __init__(self, dt, admissible_dt):
        super().__init__(f"dt={dt:.6g} exceeds the admissible step {admissible_dt:.6g}")
        self.dt = dt
        self.admissible_dt = admissible_dt


class NumericalFailureError(MVLabError, FloatingPointError):
    """The update produced NaN or negative densities."""


class InsufficientDataError(MVLabError, ValueError):
    """Not enough samples for the requested analysis."""


class InvalidBracketError(MVLabError, ValueError):
    """Both ends of a bisection bracket gave the same verdict."""


class ConfigParseError(MVLabError, ValueError):
    """A configuration document does not match the schema."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ConfigValidationError(MVLabError, ValueError):
    """A configuration value violates a semantic constraint."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
