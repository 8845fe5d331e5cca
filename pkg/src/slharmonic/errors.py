"""Exception types raised by the toolkit."""


class ToolkitError(ValueError):
    """Base class for all validation failures."""


class InvalidInputError(ToolkitError):
    pass


class DomainError(ToolkitError):
    pass


class SingularityError(ToolkitError):
    pass


class ConfigurationError(ToolkitError):
    pass
