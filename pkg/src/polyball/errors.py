"""Exception hierarchy.

Input problems derive from :class:`InputError`, numerical breakdowns from
:class:`NumericalError`; the CLI maps the two families to exit codes 2 and 3.
"""


class PolyballError(Exception):
    pass


class InputError(PolyballError, ValueError):
    pass


class NumericalError(PolyballError, ArithmeticError):
    pass


class DegreeExceeded(InputError):
    pass


class SizeOverflow(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class ShapeMismatch(InputError):
    pass


class CommutationViolation(InputError):
    def __init__(self, message, pairs=()):
        super().__init__(message)
        # ((s, j), (t, p)) index pairs of the offending entries
        self.pairs = tuple(pairs)


class NotInClosedBall(InputError):
    pass


class ZeroConstantTermViolated(InputError):
    pass


class ConstantTermAmbiguity(InputError):
    pass


class DegenerateSample(NumericalError):
    pass


class KernelNotUnitary(NumericalError):
    pass


class Diverging(NumericalError):
    pass


class ResolventSingular(NumericalError):
    pass


class FactorizationFailed(NumericalError):
    pass


class DefectRankNotOne(NumericalError):
    pass
