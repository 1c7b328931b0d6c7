"""Exception hierarchy shared across the package."""


class CorrselError(Exception):
    """Base class for every error raised by corrsel."""


class InvalidInput(CorrselError, ValueError):
    pass


class DegenerateModel(CorrselError, ValueError):
    """A model matrix is all zero and has no canonical form."""


class PointAtInfinity(CorrselError, ArithmeticError):
    """Homogeneous division by a (numerically) zero coordinate."""


class DegenerateSample(CorrselError, ValueError):
    """A point configuration does not determine a unique model."""


class NoSeparation(CorrselError, ValueError):
    """Otsu thresholding was asked to split identical values."""


class ZeroMatrix(CorrselError, ValueError):
    pass


class MissingQuality(CorrselError, ValueError):
    pass


class MissingAffine(CorrselError, ValueError):
    pass


class MissingGroundTruth(CorrselError, ValueError):
    pass


class TooFewMatches(CorrselError, ValueError):
    pass


class NoModel(CorrselError, RuntimeError):
    """Every hypothesis drawn by a sampler was degenerate."""


class SolveFailure(CorrselError, RuntimeError):
    pass


class GenerationFailure(CorrselError, RuntimeError):
    pass
