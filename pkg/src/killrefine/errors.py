"""Exception types.

Everything raised on bad user input derives from ``ValidationError`` so the
CLI can map it to exit status 1.
"""


class ValidationError(ValueError):
    pass


class MissingFile(ValidationError):
    pass


class MalformedRow(ValidationError):
    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class DuplicateId(ValidationError):
    pass


class DanglingReference(ValidationError):
    pass


class EmptyMatrix(ValidationError):
    pass


class NonNegligibleImaginary(ArithmeticError):
    """The inverse transform produced a complex signal; the spectrum was not Hermitian."""


class EmptyScores(ValidationError):
    pass


class AllDifferencesZero(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass
