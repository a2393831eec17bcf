"""Domain types and coordinate conventions shared by every module.

Conventions
-----------
All image coordinates are calibrated (intrinsics removed): ``u`` is the
horizontal and ``v`` the vertical coordinate, with the origin at the
principal point.  The row coordinate ``v`` doubles as the time variable:
the two shutters are synchronized so that the center rows (``v = 0``) of
both images are exposed at the same instant, and the opposite physical
readout direction of the second camera is carried entirely by the rig
rotation (default ``diag(-1, -1, 1)``), never baked into stored
coordinates.

Angular velocity ``omega`` (axis-angle) and translational velocity ``t``
are expressed per normalized row unit; conversions to degrees/frame or
scene units/frame happen only at presentation boundaries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ImagePoint",
    "Correspondence",
    "RigConfig",
    "MotionModel",
    "MotionEstimate",
    "InstantPosePair",
    "skew",
    "rotation_from_axis_angle",
    "linearized_rotation",
    "normalize_gauge",
]


def _frozen_array(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError("array entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImagePoint:
    """Normalized image point; ``v`` is also the scanline/time coordinate."""

    u: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.v)):
            raise ValueError("image point coordinates must be finite")

    def homogeneous(self) -> np.ndarray:
        """Lift to [u, v, 1]."""
        return np.array([self.u, self.v, 1.0])


@dataclass(frozen=True)
class Correspondence:
    """A matched point pair; each point lives in its own camera's raw frame."""

    first: ImagePoint
    second: ImagePoint


class MotionModel(enum.Enum):
    TX = "tx"
    TXY = "txy"
    TXYZ = "txyz"
    ROT = "rot"
    SIXDOF = "6dof"
    SIXDOF_BASELINE = "6dof-baseline"


# Which components a model allows to be nonzero: (omega, t mask).
_MODEL_MASKS = {
    MotionModel.TX: (False, np.array([1.0, 0.0, 0.0])),
    MotionModel.TXY: (False, np.array([1.0, 1.0, 0.0])),
    MotionModel.TXYZ: (False, np.array([1.0, 1.0, 1.0])),
    MotionModel.ROT: (True, np.array([0.0, 0.0, 0.0])),
    MotionModel.SIXDOF: (True, np.array([1.0, 1.0, 1.0])),
    MotionModel.SIXDOF_BASELINE: (True, np.array([1.0, 1.0, 1.0])),
}


@dataclass(frozen=True)
class RigConfig:
    """Relative geometry of the two-camera rig.

    ``relative_rotation`` maps camera-1 coordinates into camera-2
    coordinates; ``baseline`` is the camera-2 center offset in scene units;
    ``row_time_origin`` is the row at which both shutters coincide in time.
    """

    relative_rotation: np.ndarray = field(
        default_factory=lambda: np.diag([-1.0, -1.0, 1.0])
    )
    baseline: np.ndarray = field(default_factory=lambda: np.zeros(3))
    row_time_origin: float = 0.0

    def __post_init__(self):
        rot = _frozen_array(self.relative_rotation, (3, 3))
        base = _frozen_array(self.baseline, (3,))
        object.__setattr__(self, "relative_rotation", rot)
        object.__setattr__(self, "baseline", base)
        if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-12:
            raise ValueError("relative_rotation must be orthonormal to 1e-12")
        if abs(np.linalg.det(rot) - 1.0) > 1e-12:
            raise ValueError("relative_rotation must have determinant +1")

    @property
    def has_baseline(self) -> bool:
        return bool(np.any(self.baseline != 0.0))


@dataclass(frozen=True)
class MotionEstimate:
    """Constant-velocity rig motion: angular and translational velocity.

    Velocities are per normalized row unit.  ``scale_known`` is False for
    solvers that recover translation only up to scale (the stored ``t`` is
    then a gauge representative, see :func:`normalize_gauge`).
    """

    omega: np.ndarray
    t: np.ndarray
    model: MotionModel
    scale_known: bool = False

    def __post_init__(self):
        omega = _frozen_array(self.omega, (3,))
        t = _frozen_array(self.t, (3,))
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "t", t)
        rot_allowed, t_mask = _MODEL_MASKS[self.model]
        if not rot_allowed and np.any(omega != 0.0):
            raise ValueError(f"model {self.model} requires omega = 0")
        if np.any(t[t_mask == 0.0] != 0.0):
            raise ValueError(f"model {self.model} forbids t components {t}")

    @staticmethod
    def zero(model: MotionModel = MotionModel.SIXDOF) -> "MotionEstimate":
        return MotionEstimate(np.zeros(3), np.zeros(3), model, scale_known=True)


@dataclass(frozen=True)
class InstantPosePair:
    """Relative pose between row ``v`` of camera 1 and row ``v'`` of camera 2."""

    R: np.ndarray
    tvec: np.ndarray

    def __post_init__(self):
        R = _frozen_array(self.R, (3, 3))
        tvec = _frozen_array(self.tvec, (3,))
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "tvec", tvec)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-10:
            raise ValueError("instantaneous rotation must be orthonormal to 1e-10")


def skew(w) -> np.ndarray:
    """Cross-product matrix [w]_x with [w]_x @ v == cross(w, v)."""
    w = np.asarray(w, dtype=float)
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def rotation_from_axis_angle(w, alpha: float = 1.0) -> np.ndarray:
    """Closed-form exp(alpha * [w]_x); the zero vector maps to identity."""
    phi = float(alpha) * np.asarray(w, dtype=float)
    theta_sq = float(phi @ phi)
    K = skew(phi)
    if theta_sq < 1e-14:
        # Series evaluation; keeps orthonormality exact to < 1e-16 here.
        a = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0
        b = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0
    else:
        theta = np.sqrt(theta_sq)
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta_sq
    return np.eye(3) + a * K + b * (K @ K)


def linearized_rotation(w, alpha: float) -> np.ndarray:
    """First-order rotation I + alpha * [w]_x (not orthonormal in general)."""
    return np.eye(3) + float(alpha) * skew(w)


def normalize_gauge(t: np.ndarray, *, tol: float = 1e-9) -> np.ndarray:
    """Scale-free translation representative: t_x + t_y = 1 when possible.

    Falls back to unit norm when the in-plane part is (numerically) zero,
    keeping the input sign so cheirality decisions made upstream survive.
    """
    t = np.asarray(t, dtype=float)
    norm = np.linalg.norm(t)
    if norm == 0.0:
        return t.copy()
    s = t[0] + t[1]
    if abs(s) > tol * norm and np.hypot(t[0], t[1]) > tol * norm:
        return t / s
    return t / norm
