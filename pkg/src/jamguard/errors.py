class ParameterError(ValueError):
    """Raised when a distribution, grid or scenario parameter is inconsistent."""


class DomainError(ValueError):
    """Raised when a probability argument lies outside its open domain."""
