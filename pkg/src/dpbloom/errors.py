"""Exception hierarchy shared by every dpbloom module."""


class DomainError(ValueError):
    """A parameter or element falls outside the range an operation accepts."""


class CalibrationDomainError(DomainError):
    """The (m, k) regime makes a conditional distribution undefined."""


class NumericalError(ArithmeticError):
    """A computed probability violated a sanity bound beyond rounding error."""


class FileFormatError(DomainError):
    """A filter file has a bad magic, version, length or inconsistent header."""
