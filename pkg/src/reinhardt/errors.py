"""Exception hierarchy shared by all modules."""


class ReinhardtError(Exception):
    """Base class for every error raised by this package."""


class NonUnimodular(ReinhardtError, ValueError):
    pass


class ComplexSpectrum(ReinhardtError, ValueError):
    pass


class RadicandTooLarge(ReinhardtError, ValueError):
    pass


class IncompatibleRadicands(ReinhardtError, ValueError):
    pass


class DomainSignViolation(ReinhardtError, ValueError):
    pass


class AxisViolation(ReinhardtError, ValueError):
    pass


class InconsistentAxisFlags(ReinhardtError, ValueError):
    pass


class UnsupportedImage(ReinhardtError, ValueError):
    pass


class NotHyperbolicDomain(ReinhardtError, ValueError):
    pass


class UnsupportedModel(ReinhardtError, ValueError):
    pass


class FormViolation(ReinhardtError):
    """An automorphism escaped the parabolic trichotomy (would contradict the theory)."""


class CertificateMismatch(ReinhardtError):
    pass


class OutsideDomain(ReinhardtError, ValueError):
    pass


class GridTouchesBoundary(ReinhardtError, ValueError):
    pass


class AutomorphismRejected(ReinhardtError, ValueError):
    pass


class ResolutionTooLow(ReinhardtError):
    pass


class MarginViolation(ReinhardtError):
    pass


class IntervalViolation(ReinhardtError):
    pass


class SchemaError(ReinhardtError, ValueError):
    pass
