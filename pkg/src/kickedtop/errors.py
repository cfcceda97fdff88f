"""Exception types raised by the kicked-top routines."""


class KickedTopError(Exception):
    """Base class for all package errors."""


class NotHermitianError(KickedTopError, ValueError):
    pass


class AngleRangeError(KickedTopError, ValueError):
    pass


class NoConvergence(KickedTopError, RuntimeError):
    """Newton iteration did not reach the residual tolerance."""


class NotAFixedPoint(KickedTopError, ValueError):
    pass


class ResidualTooLarge(KickedTopError, RuntimeError):
    """An eigenpair of the Floquet operator failed its residual check."""


class ImaginaryResidue(KickedTopError, ValueError):
    """A spectral transform that should be real came out complex."""


class NTooSmall(KickedTopError, ValueError):
    pass


class ConfigError(KickedTopError, ValueError):
    pass
