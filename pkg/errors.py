"""
Exception hierarchy for the routing solvers.

Non-convergence of iterative solvers is reported as data on the result
objects; everything here is a hard failure.
"""


class RoutingError(Exception):
    """Base class for every error raised by this project."""


class ParameterRegimeError(RoutingError, ValueError):
    """Network parameters fall outside the regime a solver requires.

    The message names the violated inequality, e.g. ``c_m < r*L/delta_m``.
    """

    def __init__(self, inequality, detail=""):
        self.inequality = inequality
        message = f"parameter regime violated: {inequality}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class LatencyDomainError(RoutingError, ValueError):
    """A latency function was evaluated at negative flow."""


class ProfileError(RoutingError, ValueError):
    """Structurally invalid flow profile."""

    def __init__(self, message, violations=()):
        self.violations = list(violations)
        if self.violations:
            message = f"{message}: " + "; ".join(self.violations)
        super().__init__(message)


class DocMatrixError(RoutingError, ValueError):
    """Degree-of-cooperation row off the probability simplex."""


class ConfigurationError(RoutingError, ValueError):
    """Bad solver knobs or latency parameters."""


class ConsistencyError(RoutingError, RuntimeError):
    """An internal cross-check between two computations failed."""


class ScenarioError(RoutingError, ValueError):
    """Scenario file could not be parsed or validated."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
