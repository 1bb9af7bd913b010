class ParameterError(ValueError):
    """A configuration or argument violates a documented range."""


class InvariantViolation(AssertionError):
    """An internal guarantee failed at runtime (maps to CLI exit code 1)."""
