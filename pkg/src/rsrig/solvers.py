"""Minimal solvers mapping correspondence sets to motion candidates.

All solvers work in raw per-camera coordinates; the rig rotation enters
only through the equations.  Translation-only solvers are closed-form;
the rotation solver reduces to three quadrics, the five-point solver to
the ten-cubic hidden-variable system, and the known-baseline solver to
the Macaulay elimination, all in :mod:`rsrig.polysolve`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import polysolve
from .core import (
    Correspondence,
    ImagePoint,
    InstantPosePair,
    MotionEstimate,
    MotionModel,
    RigConfig,
    rotation_from_axis_angle,
    skew,
)
from .errors import (
    CheiralityFailure,
    DegenerateRows,
    DegenerateSystem,
    GaugeDegenerate,
    InconsistentRows,
    InsufficientCorrespondences,
    RankDeficient,
)

__all__ = [
    "SolverResult",
    "MINIMAL_SET_SIZE",
    "corr_matrix",
    "instant_pose",
    "epipolar_residual",
    "sampson_residuals",
    "homography_residuals",
    "solve_tx",
    "solve_txy",
    "solve_txyz",
    "solve_rotation",
    "solve_6dof",
    "solve_6dof_baseline",
]

ROW_COINCIDENCE_TOL = 1e-9

MINIMAL_SET_SIZE = {
    MotionModel.TX: 1,
    MotionModel.TXY: 1,
    MotionModel.TXYZ: 2,
    MotionModel.ROT: 2,
    MotionModel.SIXDOF: 5,
    MotionModel.SIXDOF_BASELINE: 6,
}


@dataclass(frozen=True)
class SolverResult:
    """Candidates sorted by ascending algebraic residual; may be empty."""

    candidates: tuple
    residuals: tuple

    def __post_init__(self):
        if len(self.candidates) != len(self.residuals):
            raise ValueError("candidate/diagnostic length mismatch")

    @property
    def best(self) -> MotionEstimate | None:
        return self.candidates[0] if self.candidates else None


def corr_matrix(corrs) -> np.ndarray:
    """Stack correspondences into an (N, 4) array [u1 v1 u2 v2]."""
    if isinstance(corrs, np.ndarray):
        return np.atleast_2d(np.asarray(corrs, dtype=float))
    return np.array(
        [[c.first.u, c.first.v, c.second.u, c.second.v] for c in corrs], dtype=float
    )


def instant_pose(
    motion: MotionEstimate, rig: RigConfig, v: float, v_prime: float
) -> InstantPosePair:
    """Relative pose between row v of camera 1 and row v' of camera 2."""
    Rr = rig.relative_rotation
    R = Rr @ rotation_from_axis_angle(motion.omega, v_prime - v)
    tvec = v_prime * (Rr @ motion.t) + Rr @ rig.baseline - v * (R @ motion.t)
    return InstantPosePair(R, tvec)


def _essential(motion: MotionEstimate, rig: RigConfig, v, vp, linearized: bool):
    """Instantaneous essential matrix (single pair)."""
    Rr = rig.relative_rotation
    d = vp - v
    if linearized:
        Ri = Rr @ (np.eye(3) + d * skew(motion.omega))
        E = vp * (Rr @ skew(motion.t)) @ (np.eye(3) + d * skew(motion.omega)) - v * (
            Ri @ skew(motion.t)
        )
        if rig.has_baseline:
            E = E + skew(Rr @ rig.baseline) @ Ri
        return E
    Ri = Rr @ rotation_from_axis_angle(motion.omega, d)
    E = vp * skew(Rr @ motion.t) @ Ri - v * Ri @ skew(motion.t)
    if rig.has_baseline:
        E = E + skew(Rr @ rig.baseline) @ Ri
    return E


def epipolar_residual(
    corr: Correspondence,
    motion: MotionEstimate,
    rig: RigConfig,
    linearized: bool = False,
) -> float:
    """Algebraic epipolar constraint value u'^T E(v, v') u."""
    E = _essential(motion, rig, corr.first.v, corr.second.v, linearized)
    return float(corr.second.homogeneous() @ E @ corr.first.homogeneous())


def _batched_exact_rotations(omega: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Stack of exp(angle_i * [omega]_x)."""
    n = len(angles)
    nrm = np.linalg.norm(omega)
    out = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    if nrm == 0.0:
        return out
    K = skew(omega / nrm)
    th = angles * nrm
    out += np.sin(th)[:, None, None] * K + (1.0 - np.cos(th))[:, None, None] * (K @ K)
    return out


def _essential_batch(arr: np.ndarray, motion: MotionEstimate, rig: RigConfig):
    v, vp = arr[:, 1], arr[:, 3]
    Rr = rig.relative_rotation
    Rd = _batched_exact_rotations(motion.omega, vp - v)
    RF = Rr[None] @ Rd
    A = skew(Rr @ motion.t)
    E = vp[:, None, None] * (A @ RF) - v[:, None, None] * (RF @ skew(motion.t))
    if rig.has_baseline:
        E = E + skew(Rr @ rig.baseline) @ RF
    return E


def sampson_residuals(arr: np.ndarray, motion: MotionEstimate, rig: RigConfig) -> np.ndarray:
    """First-order geometric epipolar error per correspondence (normalized units)."""
    arr = corr_matrix(arr)
    u1 = np.column_stack([arr[:, 0], arr[:, 1], np.ones(len(arr))])
    u2 = np.column_stack([arr[:, 2], arr[:, 3], np.ones(len(arr))])
    E = _essential_batch(arr, motion, rig)
    Eu = np.einsum("nij,nj->ni", E, u1)
    Etu = np.einsum("nji,nj->ni", E, u2)
    num = np.einsum("ni,ni->n", u2, Eu)
    den = np.sqrt(Eu[:, 0] ** 2 + Eu[:, 1] ** 2 + Etu[:, 0] ** 2 + Etu[:, 1] ** 2)
    return np.where(den > 0.0, np.abs(num) / np.where(den > 0.0, den, 1.0), 0.0)


def homography_residuals(arr: np.ndarray, omega: np.ndarray, rig: RigConfig) -> np.ndarray:
    """Reprojection error of the rotation-only row homography (normalized units)."""
    arr = corr_matrix(arr)
    v, vp = arr[:, 1], arr[:, 3]
    u2 = np.column_stack([arr[:, 2], vp, np.ones(len(arr))])
    p = u2 @ rig.relative_rotation  # R_r^T u2 row-wise
    Rd = _batched_exact_rotations(omega, v - vp)
    h = np.einsum("nij,nj->ni", Rd, p)
    bad = h[:, 2] <= 1e-12
    h2 = np.where(bad[:, None], 1.0, h)
    pred = h2[:, :2] / h2[:, 2:3]
    res = np.hypot(arr[:, 0] - pred[:, 0], v - pred[:, 1])
    return np.where(bad, np.inf, res)


# --------------------------------------------------------------------------
# translation solvers (closed form)
# --------------------------------------------------------------------------

def _flipped_second(corr: Correspondence, rig: RigConfig) -> np.ndarray:
    return rig.relative_rotation.T @ corr.second.homogeneous()


def solve_tx(corr: Correspondence, rig: RigConfig = RigConfig()) -> tuple[ImagePoint, float]:
    """Single-axis translation: GS point by x-interpolation + t_x-to-depth ratio.

    Raises InconsistentRows when the row pair violates the pure-x model
    (the second camera must see the point on the time-mirrored row).
    """
    u, v = corr.first.u, corr.first.v
    g = _flipped_second(corr, rig)
    g = g / g[2]
    if abs(v - g[1]) > 1e-6:
        raise InconsistentRows(f"rows v={v}, v'={corr.second.v} violate the t_x model")
    dv = v - corr.second.v
    if abs(dv) < ROW_COINCIDENCE_TOL:
        raise InconsistentRows("simultaneous rows carry no translation signal")
    ratio = (u - g[0]) / dv
    return ImagePoint(u - ratio * v, v), float(ratio)


def solve_txy(
    corr: Correspondence, rig: RigConfig = RigConfig()
) -> tuple[ImagePoint, tuple[float, float]]:
    """In-plane translation: GS point and (t_x, t_y) per unit depth."""
    u, v = corr.first.u, corr.first.v
    g = _flipped_second(corr, rig)
    g = g / g[2]
    dv = v - corr.second.v
    if abs(dv) < ROW_COINCIDENCE_TOL:
        raise DegenerateRows("correspondence lies on simultaneous rows")
    rx = (u - g[0]) / dv
    ry = (v - g[1]) / dv
    return ImagePoint(u - rx * v, v - ry * v), (float(rx), float(ry))


def solve_txyz(corrs, rig: RigConfig = RigConfig()) -> SolverResult:
    """General translation direction from two correspondences.

    Homogeneous system in (t, lambda_1, lambda'_1, lambda_2, lambda'_2);
    the null direction is signed for positive depths and stored under the
    scale-free gauge.
    """
    arr = corr_matrix(corrs)
    if arr.shape[0] != 2:
        raise InsufficientCorrespondences("txyz needs exactly 2 correspondences")
    A = np.zeros((6, 7))
    for i in range(2):
        u1 = np.array([arr[i, 0], arr[i, 1], 1.0])
        g = rig.relative_rotation.T @ np.array([arr[i, 2], arr[i, 3], 1.0])
        dv = arr[i, 1] - arr[i, 3]
        A[3 * i : 3 * i + 3, 0:3] = -dv * np.eye(3)
        A[3 * i : 3 * i + 3, 3 + 2 * i] = u1
        A[3 * i : 3 * i + 3, 4 + 2 * i] = -g
    _, s, Vh = np.linalg.svd(A)
    # A is 6x7: one null direction always exists (Vh[-1]); more appear when
    # singular values vanish
    extra = s < 1e-9 * max(s[0], 1e-300)
    near_null = np.vstack([Vh[:6][extra], Vh[6:]])
    if len(near_null) > 1:
        if np.max(np.abs(near_null[:, :3])) < 1e-8:
            # static data: the null space is spanned by per-correspondence
            # depth scalings and the translation is exactly zero
            est = MotionEstimate(np.zeros(3), np.zeros(3), MotionModel.TXYZ,
                                 scale_known=False)
            return SolverResult((est,), (float(s[-1] / max(s[0], 1e-300)),))
        raise RankDeficient("translation system null space has dimension > 1")
    nv = Vh[-1]
    lam = nv[3:]
    if np.all(lam > 1e-12):
        pass
    elif np.all(lam < -1e-12):
        nv = -nv
    else:
        raise CheiralityFailure("no sign makes all depths positive")
    t = nv[:3]
    from .core import normalize_gauge

    est = MotionEstimate(
        np.zeros(3), normalize_gauge(t), MotionModel.TXYZ, scale_known=False
    )
    resid = float(np.max(np.abs(A @ nv)) / max(np.max(np.abs(A)), 1e-300))
    return SolverResult((est,), (resid,))


# --------------------------------------------------------------------------
# rotation solver
# --------------------------------------------------------------------------

def _rotation_equation_rows(arr: np.ndarray, rig: RigConfig) -> np.ndarray:
    """Quadric coefficient rows over MONO10 of [u']_x R_r (I + v'W)(I - vW) u.

    Expansion: [u']_x R_r (I + dW - v v' W^2) u, giving per output
    component m with a_m = row m of [u']_x R_r:
    constant a_m . u, linear -d (a_m . (u x .)), quadratic
    -v v' [(a_m w)(u w) - (a_m.u)|w|^2].
    """
    n = arr.shape[0]
    Rr = rig.relative_rotation
    uh = np.column_stack([arr[:, 0], arr[:, 1], np.ones(n)])
    u2h = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)])
    S = _skew_rows(u2h) @ Rr  # (n, 3, 3); S[i, m] = a_m
    d = arr[:, 3] - arr[:, 1]
    vvp = arr[:, 1] * arr[:, 3]
    au = np.einsum("nmi,ni->nm", S, uh)
    lin = -d[:, None, None] * np.cross(S, uh[:, None, :])
    outer = 0.5 * (
        S[:, :, :, None] * uh[:, None, None, :] + uh[:, None, :, None] * S[:, :, None, :]
    )
    Qf = -vvp[:, None, None, None] * (outer - au[:, :, None, None] * np.eye(3))
    Qf = Qf.reshape(3 * n, 3, 3)
    rows = np.empty((3 * n, 10))
    rows[:, 0] = Qf[:, 0, 0]
    rows[:, 1] = 2 * Qf[:, 0, 1]
    rows[:, 2] = 2 * Qf[:, 0, 2]
    rows[:, 3] = Qf[:, 1, 1]
    rows[:, 4] = 2 * Qf[:, 1, 2]
    rows[:, 5] = Qf[:, 2, 2]
    rows[:, 6:9] = lin.reshape(3 * n, 3)
    rows[:, 9] = au.reshape(3 * n)
    return rows


def _skew_rows(x: np.ndarray) -> np.ndarray:
    S = np.zeros((len(x), 3, 3))
    S[:, 0, 1] = -x[:, 2]
    S[:, 0, 2] = x[:, 1]
    S[:, 1, 0] = x[:, 2]
    S[:, 1, 2] = -x[:, 0]
    S[:, 2, 0] = -x[:, 1]
    S[:, 2, 1] = x[:, 0]
    return S


def solve_rotation(corrs, rig: RigConfig = RigConfig()) -> SolverResult:
    """Angular velocity from two correspondences (up to 8 candidates).

    Selects the three most independent of the six component equations by
    QR pivoting of their linearized parts, intersects the quadrics, and
    ranks every root by its residual on all available equations.
    """
    arr = corr_matrix(corrs)
    if arr.shape[0] != 2:
        raise InsufficientCorrespondences("rotation solver needs exactly 2 correspondences")
    rows = _rotation_equation_rows(arr, rig)
    lin = rows[:, 6:10]
    _, _, piv = scipy.linalg.qr(lin.T, pivoting=True, mode="economic")
    picked = rows[sorted(piv[:3])]
    omegas = polysolve.solve_3q3(picked)
    if not omegas:
        return SolverResult((), ())
    vals = polysolve.monomial_values(polysolve.MONO10, np.array(omegas))
    res = np.max(np.abs(vals @ rows.T), axis=1) / max(np.max(np.abs(rows)), 1e-300)
    # roots of the three selected quadrics that violate the remaining
    # equations are spurious; under noise keep everything near the best
    keep = res <= max(1e-6, 50.0 * float(np.min(res)))
    order = [i for i in np.argsort(res) if keep[i]]
    cands = tuple(
        MotionEstimate(np.asarray(omegas[i]), np.zeros(3), MotionModel.ROT, scale_known=True)
        for i in order
    )
    return SolverResult(cands, tuple(float(res[i]) for i in order))


# --------------------------------------------------------------------------
# five-point 6DOF solver
# --------------------------------------------------------------------------

def sixdof_coefficient_matrix(arr: np.ndarray, rig: RigConfig) -> np.ndarray:
    """(5, 3, 4) tensor of M(w) [x y 1]^T = 0 over MONO4 = [x, y, z, 1].

    The epipolar form u'^T E u with t = (1-x, x, y) is linear in (x, y, 1)
    with coefficients affine in w:
    coeff(t_a, w_k) = d (v' u_a p_k - v p_a u_k) - d^2 delta_ak (u.p),
    coeff(t_a, 1) = d (u x p)_a, where p = R_r^T u'.
    """
    n = arr.shape[0]
    u = np.column_stack([arr[:, 0], arr[:, 1], np.ones(n)])
    p = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)]) @ rig.relative_rotation
    v, vp = arr[:, 1], arr[:, 3]
    d = vp - v
    updot = np.einsum("ni,ni->n", u, p)
    C = (
        d[:, None, None] * (vp[:, None, None] * u[:, :, None] * p[:, None, :]
                            - v[:, None, None] * p[:, :, None] * u[:, None, :])
        - (d ** 2 * updot)[:, None, None] * np.eye(3)
    )
    c0 = d[:, None] * np.cross(u, p)
    cols = np.concatenate([C, c0[:, :, None]], axis=2)  # (n, 3(t-basis a), 4)
    M = np.empty((n, 3, 4))
    M[:, 0] = -cols[:, 0] + cols[:, 1]
    M[:, 1] = cols[:, 2]
    M[:, 2] = cols[:, 0]
    return M


def _back_substitute_xy(Mw: np.ndarray) -> np.ndarray | None:
    _, _, Vh = np.linalg.svd(Mw)
    nv = Vh[-1]
    if abs(nv[2]) < 1e-9 * np.linalg.norm(nv):
        return None
    return nv[:2] / nv[2]


def _sixdof_joint_polish(M: np.ndarray, w: np.ndarray, xy: np.ndarray, iters: int = 3):
    """Newton polish of (w, x, y) on the five bilinear epipolar equations.

    Near the gauge degeneracy (|x|, |y| large) the null-space read-off
    amplifies eigenvector noise; polishing on the equations themselves
    restores full precision.
    """
    w = w.copy()
    xy = xy.copy()
    for _ in range(iters):
        vals = np.append(w, 1.0)
        Mw = M @ vals  # (5, 3)
        tau = np.array([xy[0], xy[1], 1.0])
        f = Mw @ tau
        J = np.empty((5, 5))
        for k in range(3):
            J[:, k] = M[:, :, k] @ tau
        J[:, 3] = Mw[:, 0]
        J[:, 4] = Mw[:, 1]
        JtJ = J.T @ J + 1e-14 * np.eye(5)
        try:
            step = np.linalg.solve(JtJ, J.T @ f)
        except np.linalg.LinAlgError:
            break
        w = w - step[:3]
        xy = xy - step[3:]
    return w, xy


def solve_6dof(corrs, rig: RigConfig = RigConfig()) -> SolverResult:
    """Full 6DOF motion (translation up to scale) from five correspondences."""
    arr = corr_matrix(corrs)
    if arr.shape[0] != 5:
        raise InsufficientCorrespondences("6dof solver needs exactly 5 correspondences")
    M = sixdof_coefficient_matrix(arr, rig)
    system = polysolve.hidden_variable_eliminate(M)
    omegas = polysolve.solve_cubic_system(system)
    cands, resids = [], []
    gauge_failures = 0
    scale = max(np.max(np.abs(M)), 1e-300)
    for w in omegas:
        Mw = M @ polysolve.monomial_values(polysolve.MONO4, w)
        xy = _back_substitute_xy(Mw)
        if xy is None:
            gauge_failures += 1
            continue
        w, xy = _sixdof_joint_polish(M, np.asarray(w), xy)
        Mw = M @ np.append(w, 1.0)
        t = np.array([1.0 - xy[0], xy[0], xy[1]])
        est = MotionEstimate(w, t, MotionModel.SIXDOF, scale_known=False)
        r = np.max(np.abs(Mw @ np.array([xy[0], xy[1], 1.0]))) / (
            scale * max(1.0, np.max(np.abs(xy)))
        )
        cands.append(est)
        resids.append(float(r))
    if not cands:
        if gauge_failures:
            raise GaugeDegenerate("every root had in-plane translation ~ 0")
        return SolverResult((), ())
    # near-double roots: the data cannot pin the parameters (a coefficient
    # perturbation of eps moves merging roots by ~sqrt(eps))
    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            gap = np.linalg.norm(cands[i].omega - cands[j].omega)
            if gap < 1e-4 * (1.0 + np.linalg.norm(cands[i].omega)):
                raise DegenerateSystem(
                    f"near-multiple root (omega gap {gap:.2e})"
                )
    order = np.argsort(resids)
    return SolverResult(
        tuple(cands[i] for i in order), tuple(resids[i] for i in order)
    )


# --------------------------------------------------------------------------
# known-baseline 6DOF solver
# --------------------------------------------------------------------------

def baseline_coefficient_matrix(arr: np.ndarray, rig: RigConfig) -> np.ndarray:
    """(n, 4, 4) tensor of M(w) [t 1]^T = 0, entries affine over MONO4.

    Same bilinear epipolar coefficients as the five-point solver (the
    pull-through identity is applied before linearizing), plus the known
    baseline as a constant column: const = p.(b x u) and linear
    d (p (b.u) - (p.u) b), with p = R_r^T u'.
    """
    n = arr.shape[0]
    u = np.column_stack([arr[:, 0], arr[:, 1], np.ones(n)])
    p = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)]) @ rig.relative_rotation
    v, vp = arr[:, 1], arr[:, 3]
    d = vp - v
    pu = np.einsum("ni,ni->n", p, u)
    M = np.zeros((n, 4, 4))
    M[:, :3, :3] = (
        d[:, None, None]
        * (vp[:, None, None] * u[:, :, None] * p[:, None, :]
           - v[:, None, None] * p[:, :, None] * u[:, None, :])
        - (d ** 2 * pu)[:, None, None] * np.eye(3)
    )
    M[:, :3, 3] = d[:, None] * np.cross(u, p)
    b = rig.baseline
    bu = u @ b
    M[:, 3, :3] = d[:, None] * (p * bu[:, None] - pu[:, None] * b)
    M[:, 3, 3] = np.einsum("ni,ni->n", p, np.cross(np.broadcast_to(b, (n, 3)), u))
    return M


def solve_6dof_baseline(corrs, rig: RigConfig) -> SolverResult:
    """Metric 6DOF motion from six correspondences and a known baseline.

    With a (numerically) zero baseline the scale is unobservable and the
    problem continuously degenerates to the five-point one, so the solver
    delegates and returns scale-free candidates.
    """
    arr = corr_matrix(corrs)
    if arr.shape[0] != 6:
        raise InsufficientCorrespondences("baseline solver needs exactly 6 correspondences")
    if np.linalg.norm(rig.baseline) < 1e-12:
        five = solve_6dof(arr[:5], rig)
        cands = tuple(
            MotionEstimate(c.omega, c.t, MotionModel.SIXDOF_BASELINE, scale_known=False)
            for c in five.candidates
        )
        return SolverResult(cands, five.residuals)
    M = baseline_coefficient_matrix(arr, rig)
    sols = polysolve.solve_baseline_system(M)
    if not sols:
        return SolverResult((), ())
    scale = max(np.max(np.abs(M)), 1e-300)
    cands, resids = [], []
    for w, t in sols:
        vals = polysolve.monomial_values(polysolve.MONO4, w)
        r = np.max(np.abs((M @ vals) @ np.append(t, 1.0))) / (
            scale * max(1.0, np.max(np.abs(t)))
        )
        cands.append(MotionEstimate(w, t, MotionModel.SIXDOF_BASELINE, scale_known=True))
        resids.append(float(r))
    order = np.argsort(resids)
    return SolverResult(tuple(cands[i] for i in order), tuple(resids[i] for i in order))
