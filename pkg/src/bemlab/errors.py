"""Exception hierarchy shared by every module."""


class BemlabError(Exception):
    """Base class for all package errors."""


class DomainError(BemlabError, ValueError):
    """A time (or parameter) lies outside the domain where a quantity is defined."""


class PreconditionError(BemlabError, ValueError):
    """An operation was called with inputs violating its stated preconditions."""


class ConfigurationError(BemlabError, ValueError):
    """A model or run was configured inconsistently (wrong dimension, degenerate grid, ...)."""


class IntegrationError(BemlabError, RuntimeError):
    """Raised when an ODE integration cannot continue.

    ``last_state`` holds ``(t, y)`` of the last accepted step.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class CausalityError(BemlabError, ValueError):
    """A graph hypersurface stopped being spacelike at some node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SignPropagationError(BemlabError, AssertionError):
    """A flow run violated the sign-propagation property."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
