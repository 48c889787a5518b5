"""Exception hierarchy.

Precondition violations derive from ``ValueError`` so callers can catch them
generically; ``ConsistencyError`` signals that two independent numerical
routes disagreed, which points at a bug rather than bad input.
"""


class ChronoError(Exception):
    """Base class for all package errors."""


class ConsistencyError(ChronoError, ArithmeticError):
    """Two routes that must agree did not, beyond tolerance."""


class NoConvergence(ChronoError, ArithmeticError):
    pass


class _Precondition(ChronoError, ValueError):
    pass


class BadFactorIndex(_Precondition):
    pass


class NotHermitian(_Precondition):
    pass


class NonOrthonormalBasis(_Precondition):
    pass


class DimensionMismatch(_Precondition):
    pass


class NonUnitaryStep(_Precondition):
    pass


# same condition, named as the scenario functions report it
NonUnitary = NonUnitaryStep


class NotNormalized(_Precondition):
    pass


class TimeOutOfRange(_Precondition, IndexError):
    pass


class NotPowerOfTwo(_Precondition):
    pass


class KOutOfRange(_Precondition, IndexError):
    pass


class NotCyclic(_Precondition):
    pass


class NotCyclicSpectrum(NotCyclic):
    pass


class NotPeriodic(_Precondition):
    pass


class BadPeriod(_Precondition):
    pass


class NotClustered(_Precondition):
    pass


class BadSplit(_Precondition):
    pass


class NotTwoQubit(_Precondition):
    pass


class NotDensityMatrix(_Precondition):
    pass


class NotLocalEvolution(_Precondition):
    pass


class Unsupported(_Precondition):
    pass


class ZeroVariance(_Precondition):
    pass


class BadN(_Precondition):
    pass


class NotNormalizedBranch(_Precondition):
    pass


class IoError(ChronoError, OSError):
    """Reading or writing a results file failed."""


class ConfigError(_Precondition):
    """A scenario configuration failed validation."""
