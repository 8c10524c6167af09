"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates the precondition of a formula or operation."""


class ResourceLimitError(RuntimeError):
    """A configured state, pair or memory cap would be exceeded."""


class ConvergenceError(RuntimeError):
    """A series could not be truncated to the requested tolerance."""
