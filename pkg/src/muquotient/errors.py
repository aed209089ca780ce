"""Exception hierarchy.

Every failure raised by the library derives from :class:`MuQuotientError`.
Input-shape problems additionally derive from :class:`ValueError`.
"""


class MuQuotientError(Exception):
    """Base class for all library errors."""


class InputError(MuQuotientError, ValueError):
    """Malformed or inconsistent input."""


class NumericalError(MuQuotientError, ArithmeticError):
    """A numerical procedure could not produce a certified answer."""


# numerics
class DegreeZero(InputError):
    pass


class BothConstant(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class NonConvergence(NumericalError):
    pass


# matrices
class NotSquare(InputError):
    pass


class SizeMismatch(InputError):
    pass


class NotMonic(InputError):
    pass


class NotCyclic(NumericalError):
    pass


class SingularGroupElement(NumericalError):
    pass


class Singular(NumericalError):
    pass


class NotHermitian(InputError):
    pass


# mu / quotient
class SizeTooSmall(InputError):
    pass


class Indeterminate(NumericalError):
    """The decision falls inside the requested margin band."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate or {}


class PoleAtZ(NumericalError):
    pass


class PoleAtW(NumericalError):
    pass


class PoleAtXi(NumericalError):
    pass


class BothZero(NumericalError):
    pass


# pick
class MembershipFailure(NumericalError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NotGeneric(NumericalError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class QuotientRangeFailure(NumericalError):
    def __init__(self, message, zetas):
        super().__init__(message)
        self.zetas = list(zetas)


class InterpolationMismatch(NumericalError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class RetryExhausted(NumericalError):
    pass
