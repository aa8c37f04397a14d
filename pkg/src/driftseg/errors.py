"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter is outside its documented domain."""


class InvalidDataError(ValueError):
    """Input data is empty, non-finite, or otherwise unusable."""


class DegenerateDataError(ValueError):
    """Data carries no usable variation (e.g. a constant series)."""


class StructuralError(RuntimeError):
    """An internal invariant was violated; indicates a bug, not bad input."""
