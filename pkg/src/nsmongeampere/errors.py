"""Exception types raised by the library."""


class NsmaError(Exception):
    pass


class NotSpd(NsmaError, ValueError):
    """Matrix failed the symmetry or positive-definiteness check."""


class NotSkew(NsmaError, ValueError):
    pass


class ConvergenceFailure(NsmaError, RuntimeError):
    pass


class DimensionTooSmall(NsmaError, ValueError):
    pass


class Inconsistent(NsmaError, ArithmeticError):
    """Two independent routes to the same quantity disagree beyond tolerance."""


class BadParams(NsmaError, ValueError):
    pass


class NotMember(NsmaError, ValueError):
    pass


class BadEta(NsmaError, ValueError):
    pass


class NonElliptic(NsmaError, ValueError):
    pass
