"""Exception hierarchy shared by the library and the CLI."""


class SLTError(Exception):
    """Base class for all library errors."""


class UsageError(SLTError, ValueError):
    """An operation was called with arguments outside its contract."""


class ValidationError(SLTError, ValueError):
    """A problem instance or settings block failed validation.

    ``diagnostics`` lists every violated condition, not just the first.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class ConfigError(ValidationError):
    """The configuration document could not be parsed into a problem."""


class InvalidTransmissionError(ValidationError):
    """The transmission matrix violates rho12 > 0, rho34 > 0."""


class NumericalError(SLTError, ArithmeticError):
    """Base for failures of the numerical machinery (CLI exit code 1)."""


class IntegrationError(NumericalError):
    def __init__(self, x, message="step size underflow"):
        self.x = float(x)
        super().__init__(f"{message} at x={self.x!r}")


class ConsistencyError(NumericalError):
    """Two routes to the same quantity disagree beyond tolerance."""


class NearSingularError(NumericalError):
    def __init__(self, value, nearest, message=None):
        self.value = float(value)
        self.nearest = float(nearest)
        if message is None:
            message = (f"lambda={self.value!r} is within tolerance of the "
                       f"eigenvalue {self.nearest!r}")
        super().__init__(message)


class DegenerateEigenfunctionError(NumericalError):
    pass
