"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* :class:`ConfigError` -- bad input: malformed expressions, missing metric
  fields, invalid scenarios.
* :class:`NumericalError` -- the input was well formed but could not be
  evaluated: domain errors, degenerate metrics, integrator failures.
"""

from __future__ import annotations


class ThreadingError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ThreadingError):
    pass


class ParseError(ConfigError):
    """Syntax error in a metric-field expression."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at byte offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class MissingFieldError(ConfigError):
    def __init__(self, name: str, family: str):
        self.name = name
        super().__init__(f"metric family {family!r} requires field {name!r}")


class NumericalError(ThreadingError):
    pass


class DomainError(NumericalError):
    """An expression was evaluated outside the domain of a real function."""

    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in subexpression {subexpression!r}")


class MetricSignatureError(NumericalError):
    """Phi or Psi not positive, or the spatial metric h not positive definite."""


class SingularMetricError(NumericalError):
    pass


class IntegrationError(NumericalError):
    def __init__(self, message: str, last_t: float):
        self.last_t = last_t
        super().__init__(f"{message} (last good t = {last_t!r})")
