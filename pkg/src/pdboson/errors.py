class PdbosonError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(PdbosonError, ValueError):
    pass


class SizeLimitError(PdbosonError):
    """An exponential-cost routine was asked for more than its guard allows."""


class UnsupportedError(PdbosonError):
    """Input lies outside the physical regime the routines model (e.g. collisions)."""


class DivergenceError(InvalidArgument):
    pass


class InitializationError(PdbosonError):
    pass
