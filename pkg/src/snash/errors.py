"""Exception types raised across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``OSError`` -> 3,
``NumericError`` -> 4.
"""


class SNashError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SNashError, ValueError):
    """Invalid user-supplied configuration or argument."""


class InvalidComponentError(ConfigError):
    """A ternary vector component is not one of 0, 1/2, 1."""


class DimensionMismatchError(ConfigError):
    """Strategy and matrix (or oracle) shapes do not agree."""


class OracleScopeError(ConfigError):
    """Game too large for the exact enumeration oracle."""


class NumericError(SNashError, ArithmeticError):
    """Numerical failure during a computation."""


class DegenerateMatrixError(NumericError):
    """Operation undefined because all rewards are equal."""


class ParameterError(NumericError):
    """Bandit parametrization produces unusable values (e.g. weight overflow)."""


class RewardRangeError(NumericError):
    """A bandit received a reward outside the unit interval."""


class NumericOverflowError(NumericError):
    """Weights became non-finite."""
