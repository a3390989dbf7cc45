"""Exception hierarchy shared by all modules."""


class ShiftdynError(Exception):
    """Base class for every error raised by this package."""


class InputError(ShiftdynError, ValueError):
    """Malformed or out-of-range input."""


class ParseError(InputError):
    """A text literal or file could not be parsed.

    ``line`` is the 1-based line number when the input is a file.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidWindowError(InputError):
    pass


class DimensionMismatchError(InputError):
    pass


class DegenerateInputError(InputError):
    pass


class CapacityError(ShiftdynError):
    """The horizon is too small to place a requested block."""

    def __init__(self, message, k=None, block=None):
        super().__init__(message)
        self.k = k
        self.block = block


class ConstructionFailed(ShiftdynError):
    """No admissible block position exists for target ``index``."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class ExtensionRejected(ShiftdynError):
    """A periodic extension failed the null-tail test.

    Carries the rejected ``vector`` and the offending ``tail_magnitude``.
    """

    def __init__(self, message, tail_magnitude, vector=None):
        super().__init__(message)
        self.tail_magnitude = tail_magnitude
        self.vector = vector
