"""Exception types raised across the library."""


class RsRigError(Exception):
    """Base class for all library errors."""


class NonPositiveDepth(RsRigError):
    """A 3D point has non-positive depth in a camera."""


class NoConvergence(RsRigError):
    """A fixed-point row iteration did not converge within the cap."""


class EmptyScene(RsRigError):
    """Scene generation produced no usable points."""


class DegenerateSystem(RsRigError):
    """Polynomial system is rank-deficient beyond tolerance."""


class NumericalFailure(RsRigError):
    """An eigenvalue / factorization routine failed to converge."""


class ShapeMismatch(RsRigError):
    """Input equations do not have the expected shape."""


class InconsistentRows(RsRigError):
    """Row coordinates violate the assumed motion model."""


class DegenerateRows(RsRigError):
    """Correspondence lies on simultaneous rows; no temporal signal."""


class RankDeficient(RsRigError):
    """Linear system null space has dimension > 1."""


class CheiralityFailure(RsRigError):
    """No sign choice makes all perspective depths positive."""


class GaugeDegenerate(RsRigError):
    """Translation gauge cannot be applied (pure-forward-like motion)."""


class InsufficientCorrespondences(RsRigError):
    """Fewer correspondences than the solver's minimal set."""


class NoModelFound(RsRigError):
    """All robust-estimation samples were degenerate."""


class EmptyAfterFiltering(RsRigError):
    """Correspondence preselection removed every candidate."""


class BehindCamera(RsRigError):
    """A mapped point has non-positive homogeneous depth."""


class DegenerateBaseline(RsRigError):
    """Row pair too close in time to triangulate reliably."""


class DimensionMismatch(RsRigError):
    """Dense inputs do not share dimensions."""


class ParseError(RsRigError):
    """Malformed file content; message carries the position."""


class EmptyFile(RsRigError):
    """File contains no records."""


class BadMagic(RsRigError):
    """File does not start with the expected magic string."""


class TruncatedData(RsRigError):
    """Binary payload ended early."""


class UnsupportedFormat(RsRigError):
    """File format variant is not supported."""


class CorruptHeader(RsRigError):
    """File header could not be parsed."""
