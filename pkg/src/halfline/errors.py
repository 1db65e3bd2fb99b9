"""Exception hierarchy shared by all halfline modules."""


class ScatteringError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ScatteringError):
    pass


class SelfadjointnessViolated(ScatteringError):
    pass


class RankDeficient(ScatteringError):
    pass


class NotHermitian(ScatteringError):
    pass


class NonFiniteSample(ScatteringError):
    pass


class AsymmetricGrid(ScatteringError):
    pass


class BadBoundState(ScatteringError):
    pass


class IntegrationFailure(ScatteringError):
    pass


class NonFinite(ScatteringError):
    pass


class SingularJost(ScatteringError):
    pass


class ScanInconclusive(ScatteringError):
    pass


class ClusterUnresolved(ScatteringError):
    pass


class NotPositive(ScatteringError):
    pass


class TailNotSettled(ScatteringError):
    pass


class SingularOperator(ScatteringError):
    pass


class TruncationTooShort(ScatteringError):
    pass


class SpectralFailure(ScatteringError):
    pass


class PhaseUnwrapFailure(ScatteringError):
    pass
