"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class PortlossError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PortlossError, ValueError):
    """An argument lies outside the domain of the function."""


class ValidationError(PortlossError, ValueError):
    """A parameter violates a model invariant.

    ``field`` names the offending parameter so callers (notably the config
    loader) can point at it.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateModelError(PortlossError):
    """The model collapses to a case the requested formula cannot handle."""


class QuadratureError(PortlossError, ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class BracketError(PortlossError, ValueError):
    """Root finding was started without a sign change over the bracket."""


class UnsupportedLawError(PortlossError, NotImplementedError):
    """The jump-size law has no implementation for this operation."""


class ConfigError(PortlossError, ValueError):
    """Malformed configuration document."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
