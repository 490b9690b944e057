"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a configured memory or work budget."""


class InternalInvariantError(AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
