import numpy as np
import pytest

from rsrig.core import (
    ImagePoint,
    MotionEstimate,
    MotionModel,
    RigConfig,
    linearized_rotation,
    normalize_gauge,
    rotation_from_axis_angle,
    skew,
)


def series_exponential(w, alpha, terms=20):
    """Independent oracle: truncated matrix-exponential series."""
    A = alpha * skew(w)
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def test_rotation_identity_cases():
    assert np.allclose(rotation_from_axis_angle([0, 0, 1], 0.0), np.eye(3))
    assert np.allclose(rotation_from_axis_angle([0, 0, 0], 5.0), np.eye(3))
    R = rotation_from_axis_angle([0, 0, 1], np.pi / 2)
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(R, expected, atol=1e-15)


def test_rotation_matches_series_oracle():
    w = np.array([1.0, 2.0, 3.0]) / np.sqrt(14.0)
    R = rotation_from_axis_angle(w, 0.3)
    assert np.max(np.abs(R - series_exponential(w, 0.3))) < 1e-12


def test_rotation_orthonormal_to_1e12():
    rng = np.random.default_rng(1)
    for _ in range(200):
        w = rng.normal(size=3)
        a = rng.uniform(-2, 2)
        R = rotation_from_axis_angle(w, a)
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12


def test_same_axis_composes_additively():
    rng = np.random.default_rng(2)
    for _ in range(100):
        w = rng.normal(size=3)
        a, b = rng.uniform(-1, 1, size=2)
        lhs = rotation_from_axis_angle(w, a) @ rotation_from_axis_angle(w, b)
        rhs = rotation_from_axis_angle(w, a + b)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_rotation_commutes_with_cross_product():
    rng = np.random.default_rng(3)
    for _ in range(100):
        R = rotation_from_axis_angle(rng.normal(size=3), rng.uniform(-2, 2))
        u, v = rng.normal(size=3), rng.normal(size=3)
        assert np.max(np.abs(np.cross(R @ u, R @ v) - R @ np.cross(u, v))) < 1e-12


def test_linearized_rotation_values():
    assert np.allclose(linearized_rotation([0, 0, 0], 5.0), np.eye(3))
    L = linearized_rotation([0, 0, 1], 0.01)
    assert np.allclose(L, np.eye(3) + 0.01 * skew([0, 0, 1]))


def test_linearized_error_bound():
    rng = np.random.default_rng(4)
    for _ in range(300):
        w = rng.normal(size=3)
        w /= np.linalg.norm(w)
        a = rng.uniform(-0.05, 0.05)
        diff = linearized_rotation(w, a) - rotation_from_axis_angle(w, a)
        assert np.linalg.norm(diff, "fro") <= (abs(a) * np.linalg.norm(w)) ** 2 + 1e-15


def test_image_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        ImagePoint(np.nan, 0.0)
    p = ImagePoint(0.25, -0.5)
    assert np.allclose(p.homogeneous(), [0.25, -0.5, 1.0])


def test_rig_config_validation():
    rig = RigConfig()
    assert np.allclose(rig.relative_rotation, np.diag([-1.0, -1.0, 1.0]))
    assert not rig.has_baseline
    with pytest.raises(ValueError):
        RigConfig(relative_rotation=np.eye(3) * 1.001)
    with pytest.raises(ValueError):
        RigConfig(relative_rotation=np.diag([1.0, -1.0, 1.0]))  # det -1


def test_motion_estimate_model_constraints():
    MotionEstimate(np.zeros(3), np.array([1.0, 2.0, 0.0]), MotionModel.TXY)
    with pytest.raises(ValueError):
        MotionEstimate(np.zeros(3), np.array([1.0, 2.0, 3.0]), MotionModel.TXY)
    with pytest.raises(ValueError):
        MotionEstimate(np.array([0.1, 0, 0]), np.zeros(3), MotionModel.TXYZ)


def test_motion_estimate_immutable():
    est = MotionEstimate(np.zeros(3), np.zeros(3), MotionModel.SIXDOF)
    with pytest.raises(ValueError):
        est.omega[0] = 1.0


def test_normalize_gauge():
    t = normalize_gauge(np.array([2.0, 2.0, 8.0]))
    assert abs(t[0] + t[1] - 1.0) < 1e-15
    t = normalize_gauge(np.array([0.0, 0.0, 3.0]))
    assert np.allclose(t, [0, 0, 1])
    t = normalize_gauge(np.array([0.0, 0.0, -3.0]))
    assert np.allclose(t, [0, 0, -1])  # sign preserved for cheirality
