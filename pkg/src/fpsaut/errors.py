"""Exception hierarchy.

Every error carries a stable ``token`` (the class name) that the command
line front end prints as the first word of its failure line.
"""


class FpsError(Exception):
    """Base class for all library errors."""

    @property
    def token(self):
        return type(self).__name__


class RingMismatch(FpsError, TypeError):
    pass


class ContextMismatch(FpsError, ValueError):
    pass


class NotAUnit(FpsError, ZeroDivisionError):
    pass


class NotFound(FpsError, LookupError):
    pass


class NoCombination(FpsError, ValueError):
    pass


class NotAugmented(FpsError, ValueError):
    pass


class NotAutomorphism(FpsError, ValueError):
    pass


class NotInGI(FpsError, ValueError):
    """The automorphism does not have identity linear part."""


class BadElementaryData(FpsError, ValueError):
    pass


class NotAffine(FpsError, ArithmeticError):
    """A probed residual map failed the affineness check."""


class Inconsistent(FpsError, ArithmeticError):
    """A linear system has no solution."""


class NonUnitPivot(FpsError, ArithmeticError):
    pass


class BadUnits(FpsError, ValueError):
    """Scalar parameters fail the unit condition at some degree."""

    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class UnsupportedCharacteristic(FpsError, ValueError):
    pass


class UnsupportedRing(FpsError, ValueError):
    pass


class InternalContradiction(FpsError, AssertionError):
    """A post-solve self-check failed; no certificate is emitted."""


class ParseError(FpsError, ValueError):
    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f"line {line}, column {column}: {message}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(self.expected) + ")"
        super().__init__(detail)
