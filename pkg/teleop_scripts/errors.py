"""Exceptions raised by the simulation, estimation and experiment layers."""


class TeleopError(Exception):
    """Base class for every error raised by this project."""


class ConfigError(TeleopError):
    """A configuration key is unknown, missing a value or out of range."""

    def __init__(self, key, message):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}")


class InvalidParameterError(TeleopError, ValueError):
    """A plant or estimator parameter violates its invariant."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class FractionalDelayError(InvalidParameterError):
    """The delay is not a whole number of integration steps."""

    def __init__(self, delay, dt):
        self.delay = delay
        self.dt = dt
        super().__init__("delta", f"{delay!r} s is not a whole multiple of dt={dt!r} s")


class IntegrationDivergedError(TeleopError):
    """The integrated state became non-finite."""

    def __init__(self, step_index):
        self.step_index = step_index
        super().__init__(f"state became non-finite at step {step_index}")


class InvalidProblemError(TeleopError, ValueError):
    """A regression problem has mismatched, too short or non-finite vectors."""


class DegenerateRegressorError(TeleopError):
    """The weighted regressor energy is too small to identify a slope."""

    def __init__(self, method, denominator):
        self.method = method
        self.denominator = denominator
        super().__init__(f"{method}: sum(W*Phi^2) = {denominator!r} is below tolerance")


class UndefinedReferenceError(TeleopError, ValueError):
    """A percentage error was requested against a zero reference."""


class EmptySampleError(TeleopError, ValueError):
    """A rank test was given an empty sample."""
