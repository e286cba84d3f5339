"""Exception hierarchy shared by all modules."""


class NspError(Exception):
    """Base class for every error raised by this package."""


class InputDomainError(NspError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ParameterError(NspError, ValueError):
    """Physical parameters violate the regime required by an operation."""


class UnsupportedProfileError(NspError, TypeError):
    """The doping profile variant cannot provide the requested quantity."""


class DegenerateStateError(NspError, ValueError):
    """The state is too degenerate (e.g. zero mass) for the operation."""


class ProjectionError(NspError, RuntimeError):
    """No sign change of J along the fibering scan."""


class StagnationError(NspError, RuntimeError):
    """An iterative solver stopped making progress."""


class ConvergenceError(NspError, RuntimeError):
    """An iteration cap was reached before the tolerance was met."""


class BracketError(NspError, RuntimeError):
    """A bisection bracket does not enclose a sign change."""


class SingularSystemError(NspError, ArithmeticError):
    """A linear system is singular; carries the compatibility row if known."""

    def __init__(self, message: str, pivot_row=None):
        super().__init__(message)
        self.pivot_row = pivot_row


class ConfigError(NspError, ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
