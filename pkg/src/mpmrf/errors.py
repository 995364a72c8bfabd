"""Exception hierarchy.

Every error raised on bad input derives from :class:`MPMRFError`, which is a
``ValueError`` so callers that only care about "bad argument" can catch that.
"""


class MPMRFError(ValueError):
    pass


class NotATree(MPMRFError):
    pass


class BadIndex(MPMRFError):
    pass


class BadShapeParam(MPMRFError):
    pass


class BadLambda(MPMRFError):
    pass


class BadAlpha(MPMRFError):
    pass


class MissingEdgeAlpha(MPMRFError):
    pass


class NotASubtree(MPMRFError):
    pass


class BadVectorLength(MPMRFError):
    pass


class TooLargeForOracle(MPMRFError):
    pass


class BadNfft(MPMRFError):
    pass


class AliasingTolerance(MPMRFError):
    """Inverse DFT output shows wrapped-around mass; raise ``n_fft``."""


class ZeroMassAtK(MPMRFError):
    pass


class UnresolvableQuantile(MPMRFError):
    pass


class TailDominates(MPMRFError):
    """The truncated support cannot bound the exponential moment."""
