"""Exception hierarchy; the CLI maps these onto exit codes."""


class SzegoLabError(Exception):
    """Base class for all package errors."""


class ValidationError(SzegoLabError, ValueError):
    """Invalid input or configuration (CLI exit code 2)."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class NumericalFailure(SzegoLabError, ArithmeticError):
    """A computation could not produce a finite, trustworthy result (exit code 3)."""


class IntegrationError(NumericalFailure):
    """Non-finite state produced during time stepping."""

    def __init__(self, step, time=None):
        msg = f"non-finite state at step {step}"
        if time is not None:
            msg += f" (t={time!r})"
        super().__init__(msg)
        self.step = step
        self.time = time


class GevreyRangeError(NumericalFailure, OverflowError):
    """An exponential weight exceeds the double-precision range."""

    def __init__(self, mode, exponent):
        super().__init__(
            f"exponential weight overflows at mode {mode} (exponent {exponent:.6g}); "
            "use a smaller sigma or degree"
        )
        self.mode = mode
        self.exponent = exponent
