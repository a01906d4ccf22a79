"""Exception hierarchy.

Every domain failure derives from :class:`QsnetError`; the class name is the
name of the violated invariant so that callers (and the CLI) can report it
verbatim.
"""


class QsnetError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(QsnetError):
    """Malformed input file (bad JSON, unknown keys, non-finite numbers)."""


# model
class DimensionMismatch(QsnetError):
    pass


class ThetaNotAntisymmetric(QsnetError):
    pass


class ThetaSingular(QsnetError):
    pass


class R0NotSymmetric(QsnetError):
    pass


class RingTooShort(QsnetError):
    pass


# spectral
class NotOnUnitCircle(QsnetError):
    pass


class SingularKroneckerSystem(QsnetError):
    pass


class NotStable(QsnetError):
    pass


class DegenerateDenominator(QsnetError):
    pass


class NegativeTime(QsnetError):
    pass


class GridMismatch(QsnetError):
    pass


# lmi
class A0NotHurwitz(QsnetError):
    pass


class NoCertificateFound(QsnetError):
    """Newton-Kleinman search did not produce a certificate.

    The LMI condition is only sufficient, so this does not imply instability.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


# entanglement
class NotOneMode(QsnetError):
    pass


class SamePair(QsnetError):
    pass


class MinorViolation(QsnetError):
    pass


class InvalidCovariance(QsnetError):
    pass


# ensemble
class RejectionLimitExceeded(QsnetError):
    pass
