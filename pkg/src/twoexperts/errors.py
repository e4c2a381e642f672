"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class InvariantViolation(RuntimeError):
    """A computed quantity broke a guarantee it is supposed to satisfy."""


class ResourceError(RuntimeError):
    """The request would need more memory or time than we allow."""
