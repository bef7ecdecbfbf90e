"""Exception types shared across the lab."""


class RmtLabError(Exception):
    """Base class for all rmtlab errors."""


class InvalidDimensionError(RmtLabError, ValueError):
    """Matrix side or subspace dimension out of range."""


class ShapeMismatchError(RmtLabError, ValueError):
    """Operands have incompatible shapes."""


class NotInSubspaceError(RmtLabError, ValueError):
    """Matrix has a component orthogonal to the subspace beyond tolerance."""


class SamplerError(RmtLabError, ValueError):
    """A radial sampler produced invalid values or a bad normalization."""


class NumericOverflowError(RmtLabError, ArithmeticError):
    """Non-finite values appeared in a numeric computation."""


class UnsupportedSpaceError(RmtLabError, ValueError):
    """Operation is not defined for the requested matrix subspace."""


class DegreeOverflowError(RmtLabError, ValueError):
    """Polynomial degree exceeds what the target object supports."""


class SizeLimitError(RmtLabError, ValueError):
    """Exact-enumeration size limits exceeded."""


class ConfigError(RmtLabError, ValueError):
    """Experiment configuration failed validation."""
