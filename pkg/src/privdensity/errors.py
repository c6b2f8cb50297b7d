"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch that.
"""


class DomainError(ValueError):
    """A numeric argument lies outside the domain of the operation."""


class ConstructionError(ValueError):
    """A density or code could not be built with the requested parameters."""


class InputError(ValueError):
    """A dataset or evaluation point is outside [0, 1]."""


class SizeError(ValueError):
    """An exhaustive enumeration would exceed its combinatorial budget."""


class ConfigError(ValueError):
    """An estimator or experiment configuration is invalid."""
