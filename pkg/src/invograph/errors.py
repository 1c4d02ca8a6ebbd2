"""Exception hierarchy shared by all modules."""


class InvographError(Exception):
    pass


class NotPrime(InvographError, ValueError):
    pass


class ReduciblePolynomial(InvographError, ValueError):
    pass


class DegreeMismatch(InvographError, ValueError):
    pass


class FieldTooLarge(InvographError, ValueError):
    pass


class ZeroInverse(InvographError, ZeroDivisionError):
    pass


class DimensionMismatch(InvographError, ValueError):
    pass


class AmbientMismatch(InvographError, ValueError):
    pass


class Singular(InvographError, ValueError):
    pass


class NotInvolution(InvographError, ValueError):
    pass


class InvalidClass(InvographError, ValueError):
    pass


class InvalidM(InvographError, ValueError):
    pass


class NotInClass(InvographError, ValueError):
    pass


class ClassTooLarge(InvographError, RuntimeError):
    pass


class Disconnected(InvographError, RuntimeError):
    pass


class BoundExceeded(InvographError, RuntimeError):
    pass


class BranchUnavailable(InvographError, ValueError):
    pass


class NoIrreducible(InvographError, ValueError):
    pass


class NotLowerTriangular(InvographError, ValueError):
    pass


class Unsupported(InvographError, ValueError):
    pass


class FormatError(InvographError, ValueError):
    pass


class WitnessFailed(InvographError, RuntimeError):
    pass
