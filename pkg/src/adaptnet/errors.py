"""Exception and warning types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid network, process or experiment configuration."""


class DomainError(ValueError):
    """Argument outside the domain of a numerical routine."""


class InstabilityError(ArithmeticError):
    """The mean-square recursion has no finite steady state."""


class ConditioningWarning(RuntimeWarning):
    """A linear solve was performed on an ill-conditioned matrix."""
