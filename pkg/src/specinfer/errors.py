"""Exception types shared across the package."""


class SpecInferError(Exception):
    """Base class for all library errors."""


class StructureError(SpecInferError):
    """A diagram operation violated ordering, width, or arity constraints."""


class ResourceError(SpecInferError):
    """An engine limit (node budget) was exceeded."""


class DomainError(SpecInferError, ValueError):
    """An argument fell outside an operation's documented domain."""


class ImpossibleTransitionError(DomainError):
    """A demonstration step has zero probability under the dynamics."""

    def __init__(self, message, demo_index=None, step=None):
        super().__init__(message)
        self.demo_index = demo_index
        self.step = step


class ConfigError(DomainError):
    """A run configuration file is malformed or inconsistent."""
