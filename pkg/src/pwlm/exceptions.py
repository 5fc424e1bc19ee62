"""Exception types raised across the package."""


class InputError(ValueError):
    """Invalid user-supplied data, shapes or parameters."""


class CSVFormatError(InputError):
    """A CSV file could not be parsed.

    ``line`` is the 1-based line number of the offending row (the header is
    line 1), or ``None`` when the problem is not tied to a single line.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(ArithmeticError):
    """Training produced non-finite values or failed to find a valid step."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration
