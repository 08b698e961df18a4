class ResourceLimitError(RuntimeError):
    """Raised when a computation would exceed a configured size bound."""


class UnsupportedDegreeError(ValueError):
    """Raised when a construction needs a perfect alternating group (d >= 5)."""
