class CohomoneError(Exception):
    """Base class for errors raised by this package."""


class InputError(CohomoneError, ValueError):
    pass


class UnsupportedError(CohomoneError, ValueError):
    pass


class DegenerateMetricError(CohomoneError, ArithmeticError):
    pass


class ResourceError(CohomoneError, RuntimeError):
    pass


class GenerationError(CohomoneError, RuntimeError):
    pass


class ConfigurationError(CohomoneError, ValueError):
    pass


class IntegrationError(CohomoneError, RuntimeError):
    pass
