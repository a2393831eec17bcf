"""Two opposite rolling shutters to one global shutter.

Motion recovery (minimal solvers, LO-RANSAC, nonlinear refinement) and
global-shutter synthesis (rotation warping, dense translation
undistortion) for a synchronized camera pair whose shutters roll in
opposite directions.
"""

from .core import (
    Correspondence,
    ImagePoint,
    InstantPosePair,
    MotionEstimate,
    MotionModel,
    RigConfig,
)

__version__ = "0.1.0"

__all__ = [
    "Correspondence",
    "ImagePoint",
    "InstantPosePair",
    "MotionEstimate",
    "MotionModel",
    "RigConfig",
    "__version__",
]
