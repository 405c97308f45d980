"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A scheme or experiment configuration violates its invariants."""


class UnsupportedConfigurationError(ConfigurationError):
    """The requested combination of options is not implemented."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
