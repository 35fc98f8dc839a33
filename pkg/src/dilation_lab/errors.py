"""Exception hierarchy.

Errors are split by what the caller can do about them: ``InvalidInput``
means the request itself is malformed, ``NumericalError`` means the inputs
were acceptable but the computation could not reach its tolerances.
"""


class DilationLabError(Exception):
    """Base class for all package errors."""


class InvalidInput(DilationLabError):
    pass


class NumericalError(DilationLabError):
    pass


class NotHermitian(InvalidInput):
    pass


class NotUnitary(InvalidInput):
    pass


class NotPSD(InvalidInput):
    pass


class NotContraction(InvalidInput):
    pass


class NotProjection(InvalidInput):
    pass


class NotPure(InvalidInput):
    pass


class NonIntegerRank(InvalidInput):
    pass


class NotUnitaryParam(NotUnitary):
    pass


class UnequalDefects(InvalidInput):
    pass


class NotADilation(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class EmptyFamily(InvalidInput):
    pass


class ConfigError(InvalidInput):
    pass


class NoConvergence(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class SingularResolvent(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass
