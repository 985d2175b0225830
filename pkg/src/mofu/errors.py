class MofuError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParamsError(MofuError, ValueError):
    pass


class OutOfDomainError(MofuError, ValueError):
    """A kinematic quantity fell outside the mechanism's valid range."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class EmptyDatasetError(MofuError, ValueError):
    pass


class InvalidConditionError(MofuError, ValueError):
    pass


class DataFormatError(MofuError, ValueError):
    """Malformed input file. Carries the path and 1-based line number when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line
