"""Nonlinear least-squares refinement of motion estimates.

Two cost functions: the rotation reprojection cost (row-homography
residuals, exact Rodrigues rotations) and the Sampson epipolar cost for
models with translation.  Both are minimized with damped Gauss-Newton
(Levenberg-Marquardt schedule: damping x10 on reject, /10 on accept,
initial 1e-3).  The multi-knot extension interpolates per-row pose
parameters piecewise-linearly between knots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    MotionEstimate,
    MotionModel,
    RigConfig,
    normalize_gauge,
    skew,
)
from .solvers import corr_matrix

__all__ = [
    "RefineResult",
    "KnotMotion",
    "rotation_cost",
    "sampson_cost",
    "refine_rotation",
    "refine_6dof",
    "refine_multiknot",
]

MAX_ITERS = 100
REL_TOL = 1e-10


@dataclass(frozen=True)
class RefineResult:
    motion: object  # MotionEstimate or KnotMotion
    cost: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class KnotMotion:
    """Piecewise-linear per-row pose: rotation vectors and translations.

    ``rows`` are strictly increasing knot positions spanning the observed
    rows; between (and beyond) knots the pose parameters interpolate
    (extrapolate) linearly, so identical knots on the constant-velocity
    line reproduce the single-motion model exactly.
    """

    rows: np.ndarray
    rotvecs: np.ndarray  # (K, 3) rotation vector at each knot
    trans: np.ndarray  # (K, 3) translation at each knot

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 1 or len(rows) < 2 or np.any(np.diff(rows) <= 0):
            raise ValueError("knot rows must be strictly increasing, >= 2 knots")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "rotvecs", np.asarray(self.rotvecs, dtype=float))
        object.__setattr__(self, "trans", np.asarray(self.trans, dtype=float))

    def weights(self, at_rows: np.ndarray) -> np.ndarray:
        """(n, K) interpolation weights, linear extrapolation outside."""
        at_rows = np.asarray(at_rows, dtype=float)
        K = len(self.rows)
        seg = np.clip(np.searchsorted(self.rows, at_rows, side="right") - 1, 0, K - 2)
        r0 = self.rows[seg]
        r1 = self.rows[seg + 1]
        a = (at_rows - r0) / (r1 - r0)
        W = np.zeros((len(at_rows), K))
        W[np.arange(len(at_rows)), seg] = 1.0 - a
        W[np.arange(len(at_rows)), seg + 1] = a
        return W

    def pose_at(self, at_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        W = self.weights(at_rows)
        return W @ self.rotvecs, W @ self.trans


def _rodrigues_batch(phi: np.ndarray) -> np.ndarray:
    """Stack of exp([phi_i]_x) for (n, 3) rotation vectors."""
    n = len(phi)
    th2 = np.einsum("ni,ni->n", phi, phi)
    th = np.sqrt(th2)
    small = th < 1e-8
    a = np.where(small, 1.0 - th2 / 6.0, np.sin(th) / np.where(small, 1.0, th))
    b = np.where(small, 0.5 - th2 / 24.0, (1.0 - np.cos(th)) / np.where(small, 1.0, th2))
    K = np.zeros((n, 3, 3))
    K[:, 0, 1] = -phi[:, 2]
    K[:, 0, 2] = phi[:, 1]
    K[:, 1, 0] = phi[:, 2]
    K[:, 1, 2] = -phi[:, 0]
    K[:, 2, 0] = -phi[:, 1]
    K[:, 2, 1] = phi[:, 0]
    return np.eye(3) + a[:, None, None] * K + b[:, None, None] * (K @ K)


def _right_jacobian_batch(phi: np.ndarray) -> np.ndarray:
    """SO(3) right Jacobian J_r(phi) such that exp(phi+d) ~ exp(phi) exp(J_r d)."""
    n = len(phi)
    th2 = np.einsum("ni,ni->n", phi, phi)
    th = np.sqrt(th2)
    small = th < 1e-6
    th2s = np.where(small, 1.0, th2)
    c1 = np.where(small, 0.5 - th2 / 24.0, (1.0 - np.cos(th)) / th2s)
    c2 = np.where(small, 1.0 / 6.0 - th2 / 120.0, (th - np.sin(th)) / (th2s * np.where(small, 1.0, th)))
    K = np.zeros((n, 3, 3))
    K[:, 0, 1] = -phi[:, 2]
    K[:, 0, 2] = phi[:, 1]
    K[:, 1, 0] = phi[:, 2]
    K[:, 1, 2] = -phi[:, 0]
    K[:, 2, 0] = -phi[:, 1]
    K[:, 2, 1] = phi[:, 0]
    return np.eye(3) - c1[:, None, None] * K + c2[:, None, None] * (K @ K)


def _skew_batch(x: np.ndarray) -> np.ndarray:
    S = np.zeros((len(x), 3, 3))
    S[:, 0, 1] = -x[:, 2]
    S[:, 0, 2] = x[:, 1]
    S[:, 1, 0] = x[:, 2]
    S[:, 1, 2] = -x[:, 0]
    S[:, 2, 0] = -x[:, 1]
    S[:, 2, 1] = x[:, 0]
    return S


# --------------------------------------------------------------------------
# rotation reprojection cost (row homography)
# --------------------------------------------------------------------------

def _rotation_residuals(arr, phi1, phi2, rig, jac_parts: bool):
    """Residuals of the first-image reprojection through the row homography.

    Prediction: dehom(R(phi1) R(phi2)^T R_r^T u'); returns (res (n,2),
    and when requested the pieces needed for parameter Jacobians:
    d res / d phi1 and d res / d phi2, each (n, 2, 3)).
    """
    n = arr.shape[0]
    u2 = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)])
    z = u2 @ rig.relative_rotation  # R_r^T u2
    R1 = _rodrigues_batch(phi1)
    R2 = _rodrigues_batch(phi2)
    y = np.einsum("nji,nj->ni", R2, z)  # R2^T z
    h = np.einsum("nij,nj->ni", R1, y)
    bad = h[:, 2] <= 1e-12
    h3 = np.where(bad, 1.0, h[:, 2])
    pred = h[:, :2] / h3[:, None]
    res = np.column_stack([arr[:, 0] - pred[:, 0], arr[:, 1] - pred[:, 1]])
    res[bad] = 1e3  # off-model; keeps cost finite and pushes away
    if not jac_parts:
        return res, None, None
    # d h / d phi1 = -R1 [y]_x Jr(phi1);  d h / d phi2 = +R1 [y]_x Jr(phi2)
    Hy = R1 @ _skew_batch(y)
    dh1 = -Hy @ _right_jacobian_batch(phi1)
    dh2 = Hy @ _right_jacobian_batch(phi2)
    # dehom chain: d pred = [I2/h3 | -h12/h3^2] d h;  res = obs - pred
    P = np.zeros((n, 2, 3))
    P[:, 0, 0] = 1.0 / h3
    P[:, 1, 1] = 1.0 / h3
    P[:, 0, 2] = -h[:, 0] / h3 ** 2
    P[:, 1, 2] = -h[:, 1] / h3 ** 2
    dr1 = -(P @ dh1)
    dr2 = -(P @ dh2)
    dr1[bad] = 0.0
    dr2[bad] = 0.0
    return res, dr1, dr2


def rotation_cost(corrs, omega, rig: RigConfig = RigConfig()) -> float:
    """Sum of squared row-homography reprojection residuals."""
    arr = corr_matrix(corrs)
    phi1 = arr[:, 1:2] * np.asarray(omega)[None, :]
    phi2 = arr[:, 3:4] * np.asarray(omega)[None, :]
    res, _, _ = _rotation_residuals(arr, phi1, phi2, rig, False)
    return float(np.sum(res ** 2))


def _rotation_pack(arr, rig, loss_threshold):
    def fun(omega):
        phi1 = arr[:, 1:2] * omega[None, :]
        phi2 = arr[:, 3:4] * omega[None, :]
        res, dr1, dr2 = _rotation_residuals(arr, phi1, phi2, rig, True)
        J = dr1 * arr[:, 1, None, None] + dr2 * arr[:, 3, None, None]
        return res.reshape(-1), J.reshape(-1, 3)

    return _truncate_wrap(fun, loss_threshold)


# --------------------------------------------------------------------------
# Sampson epipolar cost
# --------------------------------------------------------------------------

def _sampson_core(arr, E, jac_stack=None):
    n = arr.shape[0]
    u1 = np.column_stack([arr[:, 0], arr[:, 1], np.ones(n)])
    u2 = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)])
    Eu = np.einsum("nij,nj->ni", E, u1)
    Etu = np.einsum("nji,nj->ni", E, u2)
    num = np.einsum("ni,ni->n", u2, Eu)
    den2 = Eu[:, 0] ** 2 + Eu[:, 1] ** 2 + Etu[:, 0] ** 2 + Etu[:, 1] ** 2
    den = np.sqrt(np.maximum(den2, 1e-300))
    res = num / den
    if jac_stack is None:
        return res, None
    # jac_stack: (n, P, 3, 3) = dE/dtheta_p
    dEu = np.einsum("npij,nj->npi", jac_stack, u1)
    dEtu = np.einsum("npji,nj->npi", jac_stack, u2)
    dnum = np.einsum("ni,npi->np", u2, dEu)
    dden2 = 2.0 * (
        Eu[:, None, 0] * dEu[:, :, 0]
        + Eu[:, None, 1] * dEu[:, :, 1]
        + Etu[:, None, 0] * dEtu[:, :, 0]
        + Etu[:, None, 1] * dEtu[:, :, 1]
    )
    J = dnum / den[:, None] - (num / (2.0 * den ** 3))[:, None] * dden2
    return res, J


def _essential_stack(arr, omega, t, rig):
    """E_i plus dE/d(omega, t) stacks for the constant-velocity model."""
    n = arr.shape[0]
    v, vp = arr[:, 1], arr[:, 3]
    d = (vp - v)[:, None]
    Rr = rig.relative_rotation
    Rd = _rodrigues_batch(d * np.asarray(omega)[None, :])
    Ri = Rr[None] @ Rd
    A = skew(Rr @ t)
    Tt = skew(t)
    E = vp[:, None, None] * (A @ Ri) - v[:, None, None] * (Ri @ Tt)
    if rig.has_baseline:
        E = E + skew(Rr @ rig.baseline) @ Ri
    # dRi/dw_k = d * Ri [Jr(d w) e_k]_x
    Jr = _right_jacobian_batch(d * np.asarray(omega)[None, :])
    dE = np.empty((n, 6, 3, 3))
    B = skew(Rr @ rig.baseline) if rig.has_baseline else None
    for k in range(3):
        G = d[:, :, None] * (Ri @ _skew_batch(Jr[:, :, k]))
        piece = vp[:, None, None] * (A @ G) - v[:, None, None] * (G @ Tt)
        if B is not None:
            piece = piece + B @ G
        dE[:, k] = piece
    for a in range(3):
        ea = np.eye(3)[a]
        dE[:, 3 + a] = vp[:, None, None] * (skew(Rr @ ea) @ Ri) - v[:, None, None] * (
            Ri @ skew(ea)
        )
    return E, dE


def sampson_cost(corrs, motion: MotionEstimate, rig: RigConfig = RigConfig()) -> float:
    """Sum of squared Sampson epipolar residuals."""
    arr = corr_matrix(corrs)
    E, _ = _essential_stack(arr, motion.omega, motion.t, rig)
    res, _ = _sampson_core(arr, E)
    return float(np.sum(res ** 2))


def _sixdof_pack(arr, rig, loss_threshold):
    def fun(theta):
        E, dE = _essential_stack(arr, theta[:3], theta[3:], rig)
        res, J = _sampson_core(arr, E, dE)
        return res, J

    return _truncate_wrap(fun, loss_threshold)


def _truncate_wrap(fun, loss_threshold):
    if loss_threshold is None:
        return fun

    def wrapped(theta):
        res, J = fun(theta)
        mask = np.abs(res) > loss_threshold
        res = res.copy()
        res[mask] = loss_threshold
        J = J.copy()
        J[mask] = 0.0
        return res, J

    return wrapped


# --------------------------------------------------------------------------
# damped Gauss-Newton driver
# --------------------------------------------------------------------------

def _gauss_newton(fun, theta0, *, gauge=None, max_iters=MAX_ITERS, rel_tol=REL_TOL):
    theta = np.asarray(theta0, dtype=float).copy()
    if gauge is not None:
        theta = gauge(theta)
    res, J = fun(theta)
    cost = float(res @ res)
    lam = 1e-3
    iters = 0
    converged = False
    n_par = len(theta)
    for iters in range(1, max_iters + 1):
        JtJ = J.T @ J
        g = J.T @ res
        try:
            step = np.linalg.solve(JtJ + lam * np.eye(n_par), g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        cand = theta - step
        if gauge is not None:
            cand = gauge(cand)
        res_c, J_c = fun(cand)
        cost_c = float(res_c @ res_c)
        if cost_c <= cost:
            drop = cost - cost_c
            theta, res, J, cost = cand, res_c, J_c, cost_c
            lam = max(lam * 0.1, 1e-12)
            if drop < rel_tol * max(cost, 1e-300):
                converged = True
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                break
    return theta, cost, converged, iters


def refine_rotation(
    corrs,
    init: MotionEstimate,
    rig: RigConfig = RigConfig(),
    loss_threshold: float | None = None,
) -> RefineResult:
    """Minimize the rotation reprojection cost over the angular velocity."""
    if init.model is not MotionModel.ROT:
        raise ValueError("refine_rotation expects a ROT initial estimate")
    arr = corr_matrix(corrs)
    fun = _rotation_pack(arr, rig, loss_threshold)
    omega, cost, conv, iters = _gauss_newton(fun, init.omega)
    est = MotionEstimate(omega, np.zeros(3), MotionModel.ROT, scale_known=True)
    return RefineResult(est, cost, conv, iters)


def refine_6dof(
    corrs,
    init: MotionEstimate,
    rig: RigConfig = RigConfig(),
    loss_threshold: float | None = None,
) -> RefineResult:
    """Minimize the Sampson cost over (omega, t); keeps the scale gauge."""
    if init.model not in (
        MotionModel.TXYZ,
        MotionModel.SIXDOF,
        MotionModel.SIXDOF_BASELINE,
    ):
        raise ValueError("refine_6dof expects a translation-capable estimate")
    arr = corr_matrix(corrs)
    fun = _sixdof_pack(arr, rig, loss_threshold)
    gauge = None
    if not init.scale_known:
        def gauge(theta):
            out = theta.copy()
            out[3:] = normalize_gauge(out[3:])
            return out
    theta0 = np.concatenate([init.omega, init.t])
    theta, cost, conv, iters = _gauss_newton(fun, theta0, gauge=gauge)
    est = MotionEstimate(
        theta[:3], theta[3:], MotionModel.SIXDOF if init.model is MotionModel.TXYZ
        else init.model, scale_known=init.scale_known
    )
    return RefineResult(est, cost, conv, iters)


def refine_translation(
    corrs,
    init: MotionEstimate,
    rig: RigConfig = RigConfig(),
    loss_threshold: float | None = None,
) -> RefineResult:
    """Sampson refinement over the translation direction only (w stays 0).

    Used as the local-optimization step for the translation-family models;
    components the model pins to zero stay zero.
    """
    arr = corr_matrix(corrs)
    base = _sixdof_pack(arr, rig, loss_threshold)
    free = {
        MotionModel.TX: np.array([0]),
        MotionModel.TXY: np.array([0, 1]),
        MotionModel.TXYZ: np.array([0, 1, 2]),
    }[init.model]

    def fun(tfree):
        theta = np.zeros(6)
        theta[3 + free] = tfree
        res, J = base(theta)
        return res, J[:, 3 + free]

    def gauge(tfree):
        t = np.zeros(3)
        t[free] = tfree
        return normalize_gauge(t)[free]

    theta, cost, conv, iters = _gauss_newton(fun, init.t[free], gauge=gauge)
    t = np.zeros(3)
    t[free] = theta
    est = MotionEstimate(np.zeros(3), t, init.model, scale_known=init.scale_known)
    return RefineResult(est, cost, conv, iters)


# --------------------------------------------------------------------------
# multi-knot refinement
# --------------------------------------------------------------------------

def _knot_rows(arr: np.ndarray, knot_count: int) -> np.ndarray:
    lo = min(arr[:, 1].min(), arr[:, 3].min())
    hi = max(arr[:, 1].max(), arr[:, 3].max())
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, knot_count)


def _multiknot_rotation_residuals(arr, knots: KnotMotion, rig):
    phi1, _ = knots.pose_at(arr[:, 1])
    phi2, _ = knots.pose_at(arr[:, 3])
    res, _, _ = _rotation_residuals(arr, phi1, phi2, rig, False)
    return res.reshape(-1)


def _multiknot_sampson_residuals(arr, knots: KnotMotion, rig):
    n = arr.shape[0]
    phi1, a1 = knots.pose_at(arr[:, 1])
    phi2, a2 = knots.pose_at(arr[:, 3])
    Rr = rig.relative_rotation
    P1 = _rodrigues_batch(phi1)
    P2 = _rodrigues_batch(phi2)
    Rrel = Rr[None] @ P2 @ np.transpose(P1, (0, 2, 1))
    c = a2 @ Rr.T + (Rr @ rig.baseline)[None, :] - np.einsum("nij,nj->ni", Rrel, a1)
    E = _skew_batch(c) @ Rrel
    res, _ = _sampson_core(arr, E)
    return res


def refine_multiknot(
    corrs,
    init: MotionEstimate,
    knot_count: int = 3,
    rig: RigConfig = RigConfig(),
) -> RefineResult:
    """Refine with per-row pose interpolated between knots.

    All knots start on the initial constant-velocity line.  Uses the
    rotation cost for ROT initials and the Sampson cost otherwise;
    Jacobians are central finite differences over the knot parameters
    (the per-iteration cost is dominated by the batched residuals).
    With knot_count = 1 this reduces exactly to the single-motion
    refiners.
    """
    if knot_count < 1:
        raise ValueError("knot_count must be >= 1")
    if knot_count == 1:
        if init.model is MotionModel.ROT:
            return refine_rotation(corrs, init, rig)
        return refine_6dof(corrs, init, rig)
    arr = corr_matrix(corrs)
    rows = _knot_rows(arr, knot_count)
    rotation_only = init.model is MotionModel.ROT
    rotvecs = rows[:, None] * init.omega[None, :]
    trans = rows[:, None] * init.t[None, :]

    if rotation_only:
        def resid(theta):
            km = KnotMotion(rows, theta.reshape(knot_count, 3), trans)
            return _multiknot_rotation_residuals(arr, km, rig)

        theta0 = rotvecs.reshape(-1)
    else:
        def resid(theta):
            km = KnotMotion(
                rows,
                theta[: 3 * knot_count].reshape(knot_count, 3),
                theta[3 * knot_count :].reshape(knot_count, 3),
            )
            return _multiknot_sampson_residuals(arr, km, rig)

        theta0 = np.concatenate([rotvecs.reshape(-1), trans.reshape(-1)])

    def fun(theta):
        r = resid(theta)
        J = np.empty((len(r), len(theta)))
        h = 1e-7
        for p in range(len(theta)):
            tp = theta.copy()
            tp[p] += h
            tm = theta.copy()
            tm[p] -= h
            J[:, p] = (resid(tp) - resid(tm)) / (2.0 * h)
        return r, J

    theta, cost, conv, iters = _gauss_newton(fun, theta0)
    if rotation_only:
        km = KnotMotion(rows, theta.reshape(knot_count, 3), trans)
    else:
        km = KnotMotion(
            rows,
            theta[: 3 * knot_count].reshape(knot_count, 3),
            theta[3 * knot_count :].reshape(knot_count, 3),
        )
    return RefineResult(km, cost, conv, iters)
