"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a parameter or parameter combination is invalid."""


class BlowUpError(FloatingPointError):
    """Raised when a time stepper produces non-finite values.

    Carries the time index at which the blow-up was detected, which
    stability tests use to locate the instability onset.
    """

    def __init__(self, time_index: int, message: str | None = None):
        self.time_index = time_index
        super().__init__(message or f"non-finite solution values at time index {time_index}")


class GmresDivergenceError(RuntimeError):
    """Raised by a solver when the linear solve did not converge."""
