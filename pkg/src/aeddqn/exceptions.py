"""Exception types shared across the package."""


class ShapeMismatchError(ValueError):
    """Array shapes are incompatible for the requested operation."""


class EmptyMaskError(ValueError):
    """A masked selection was attempted with no valid entries."""


class FormatError(ValueError):
    """A binary buffer or file does not conform to its declared format."""


class ConfigError(ValueError):
    """A configuration file or value is invalid."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or gradient."""


class InvalidActionError(ValueError):
    """An action was applied to an environment state that forbids it."""


class StateError(RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""
