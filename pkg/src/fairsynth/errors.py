"""Exception hierarchy shared by all fairsynth modules."""


class FairsynthError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FairsynthError):
    """Bad inputs: schema violations, malformed files, unusable configs."""


class NumericError(FairsynthError):
    """Numerical failure at runtime: divergence, non-finite values."""
