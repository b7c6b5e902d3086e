"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ParameterError(ValueError):
    """A parameter value violates a documented constraint."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested tolerance."""


class CensoringWarning(UserWarning):
    """Too many local-delay replications hit the slot cap."""
