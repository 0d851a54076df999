"""Exception types shared across the package."""


class InputError(ValueError):
    """An argument violates an operation's contract."""


class UnsupportedDimensionError(InputError):
    """An operation was asked for a dimension it does not support."""


class SingularInputError(InputError):
    """A field was evaluated at a point where it is undefined."""


class ConfigError(ValueError):
    """A run configuration file is malformed or inconsistent."""


class FixedPointError(RuntimeError):
    """The corrector iteration failed to converge.

    Carries the step index, the physical time, the iteration count and the
    last update size so callers can report useful diagnostics.
    """

    def __init__(self, message, *, step=None, time=None, iterations=None, residual=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.iterations = iterations
        self.residual = residual
