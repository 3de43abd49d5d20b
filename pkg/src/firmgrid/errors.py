class FirmgridError(Exception):
    """Base class for errors raised by firmgrid."""


class ConfigurationError(FirmgridError, ValueError):
    pass


class UndefinedInputError(FirmgridError, ValueError):
    """An input makes the requested quantity undefined (e.g. zero capacity)."""


class InfeasibleError(FirmgridError, ValueError):
    pass


class UnitMismatchError(FirmgridError, ValueError):
    pass


class TraceError(FirmgridError, ValueError):
    pass


class TraceLengthError(TraceError):
    pass


class TraceRangeError(TraceError):
    pass


class TraceParseError(TraceError):
    pass
