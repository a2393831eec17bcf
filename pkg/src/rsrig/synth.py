"""Forward rolling-shutter projection and synthetic scene generation.

This module is the brute-force oracle for every solver test: it projects
3D points through the two-camera rig under constant-velocity motion and
produces correspondence sets with controlled noise and outliers.

Two generation modes exist.  ``exact`` uses the physical model with
exponential per-row rotations.  ``linearized`` produces data that satisfy
the minimal solvers' linearized equations exactly at the ground truth
(camera 1 is projected with the first-order rotation model; the camera-2
observation is then constructed from the motion model's own algebraic
relation), so solver exactness can be tested without model mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    Correspondence,
    ImagePoint,
    MotionEstimate,
    MotionModel,
    RigConfig,
    rotation_from_axis_angle,
    skew,
)
from .errors import EmptyScene, NoConvergence, NonPositiveDepth

__all__ = [
    "SceneConfig",
    "SyntheticScene",
    "project_gs",
    "project_rs",
    "generate_scene",
    "undistortion_error",
    "interp_midpoint",
]

_ROW_ITERS = 50
_ROW_TOL = 1e-10


@dataclass(frozen=True)
class SceneConfig:
    """Sweep parameters for :func:`generate_scene`.

    Angular velocity is given in degrees per frame and translation as a
    fraction of the closest scene depth per frame; both are converted to
    per-row-unit velocities using ``row_span`` (image height over focal
    length, the total row-time extent of one frame).
    """

    n_points: int = 100
    depth_range: tuple[float, float] = (5.0, 15.0)
    lateral_extent: float = 0.45  # of depth, keeps points inside the frustum
    omega_deg_per_frame: float = 0.0
    omega_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    trans_frac_per_frame: float = 0.0
    trans_direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    sigma_px: float = 0.0
    outlier_fraction: float = 0.0
    focal_px: float = 1000.0
    row_span: float = 2.048  # 2048-row sensor at focal 1000 px
    baseline_ratio: float = 0.0  # |b| as a fraction of the min depth
    baseline_direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    mode: str = "exact"  # or "linearized"


@dataclass(frozen=True)
class SyntheticScene:
    points: np.ndarray  # (N, 4) homogeneous scene points
    motion: MotionEstimate  # ground truth, scale_known=True
    rig: RigConfig
    noise_sigma_px: float
    focal_px: float
    seed: int
    min_depth: float
    config: SceneConfig = field(default=None, repr=False, compare=False)

    @property
    def noise_sigma_norm(self) -> float:
        return self.noise_sigma_px / self.focal_px


def _dehom(h: np.ndarray) -> np.ndarray:
    return h[..., :2] / h[..., 2:3]


def project_gs(X, rig: RigConfig) -> tuple[ImagePoint, ImagePoint]:
    """Global-shutter projection in both cameras (motion ignored)."""
    X = np.asarray(X, dtype=float)
    Xt = X[:3] / X[3] if X.shape[0] == 4 else X
    h1 = Xt
    h2 = rig.relative_rotation @ Xt + rig.relative_rotation @ rig.baseline
    if h1[2] <= 0.0 or h2[2] <= 0.0:
        raise NonPositiveDepth(f"point {Xt} behind a camera")
    return ImagePoint(*_dehom(h1)), ImagePoint(*_dehom(h2))


def _rotate_batch(axis_angle: np.ndarray, alphas: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """exp(alpha_i [w]_x) @ pts_i for per-point scales alpha_i, shared w."""
    nrm = np.linalg.norm(axis_angle)
    if nrm == 0.0:
        return pts.copy()
    a = axis_angle / nrm
    th = alphas * nrm
    s = np.sin(th)[:, None]
    c = (1.0 - np.cos(th))[:, None]
    ax = np.cross(a, pts)
    aax = np.cross(a, ax)
    return pts + s * ax + c * aax


def _iterate_rows(h_of_v, v0: np.ndarray) -> np.ndarray:
    """Fixed-point solve v = row(h(v)), vectorized over points."""
    v = v0.copy()
    for _ in range(_ROW_ITERS):
        h = h_of_v(v)
        bad = h[:, 2] <= 0.0
        if np.any(bad):
            raise NonPositiveDepth("point lost positive depth during row solve")
        v_new = h[:, 1] / h[:, 2]
        if np.max(np.abs(v_new - v)) < _ROW_TOL:
            return v_new
        v = v_new
    raise NoConvergence("row fixed-point iteration did not converge")


def _project_rs_batch(
    Xt: np.ndarray, motion: MotionEstimate, rig: RigConfig, mode: str
) -> tuple[np.ndarray, np.ndarray]:
    """Project (N,3) points into both cameras; returns (N,2) pairs."""
    omega, t = motion.omega, motion.t
    Rr, b = rig.relative_rotation, rig.baseline
    Rrb = Rr @ b

    if mode == "exact":
        def h1(v):
            return _rotate_batch(omega, v, Xt) + v[:, None] * t

        def h2(v):
            return (_rotate_batch(omega, v, Xt) + v[:, None] * t) @ Rr.T + Rrb

        v1 = _iterate_rows(h1, Xt[:, 1] / Xt[:, 2])
        H1 = h1(v1)
        v2 = _iterate_rows(h2, (Xt @ Rr.T + Rrb)[:, 1] / (Xt @ Rr.T + Rrb)[:, 2])
        H2 = h2(v2)
        return np.column_stack([H1[:, 0] / H1[:, 2], v1]), np.column_stack(
            [H2[:, 0] / H2[:, 2], v2]
        )

    if mode != "linearized":
        raise ValueError(f"unknown generation mode {mode!r}")

    W = skew(omega)

    def h1(v):
        return Xt + v[:, None] * (Xt @ W.T) + v[:, None] * t

    v1 = _iterate_rows(h1, Xt[:, 1] / Xt[:, 2])
    H1 = h1(v1)
    uv1 = np.column_stack([H1[:, 0] / H1[:, 2], v1])
    u1h = np.column_stack([uv1[:, 0], v1, np.ones(len(v1))])

    if np.all(t == 0.0) and not rig.has_baseline:
        # Pure rotation: camera-2 point from the linearized relative
        # homography R_r (I + v'[w]_x)(I - v[w]_x) applied to the observed
        # camera-1 point.
        base = u1h - v1[:, None] * (u1h @ W.T)

        def h2(v2):
            return (base + v2[:, None] * (base @ W.T)) @ Rr.T

        g0 = Xt @ Rr.T
        v2 = _iterate_rows(h2, g0[:, 1] / g0[:, 2])
        H2 = h2(v2)
        return uv1, np.column_stack([H2[:, 0] / H2[:, 2], v2])

    # General motion: anchor the camera-2 point at its own linearized
    # projection, then move it onto the linearized epipolar line (along
    # whichever coordinate the line constrains more strongly) so the
    # epipolar constraint holds exactly at the ground truth.
    def h2(v):
        g = Xt + v[:, None] * (Xt @ W.T) + v[:, None] * t
        return g @ Rr.T + Rrb

    g0 = Xt @ Rr.T + Rrb
    v2 = _iterate_rows(h2, g0[:, 1] / g0[:, 2])
    H2 = h2(v2)
    u2 = H2[:, 0] / H2[:, 2]
    I = np.eye(3)
    RrT = Rr @ skew(t)
    RrB = skew(Rrb)

    def epiline(v2v):
        d = (v2v - v1)[:, None, None]
        Rlin = Rr @ (I + d * W)
        E = v2v[:, None, None] * RrT @ (I + d * W) - v1[:, None, None] * Rlin @ skew(t)
        if rig.has_baseline:
            E = E + RrB @ Rlin
        return np.einsum("nij,nj->ni", E, u1h)

    ell = epiline(v2)
    solve_u = np.abs(ell[:, 0]) >= np.abs(ell[:, 1])
    bad = np.maximum(np.abs(ell[:, 0]), np.abs(ell[:, 1])) < 1e-14 * np.max(
        np.abs(ell), initial=1e-300
    )
    if np.any(bad):
        raise NoConvergence("degenerate epipolar line during linearized generation")
    # u-branch: keep the anchored row, place u' on the line
    u2 = np.where(
        solve_u, -(ell[:, 1] * v2 + ell[:, 2]) / np.where(solve_u, ell[:, 0], 1.0), u2
    )
    # v-branch: keep the anchored u', move the row onto the line
    if np.any(~solve_u):
        for _ in range(_ROW_ITERS):
            ell = epiline(v2)
            denom = np.where(~solve_u, ell[:, 1], 1.0)
            v2_new = np.where(~solve_u, -(ell[:, 0] * u2 + ell[:, 2]) / denom, v2)
            if np.max(np.abs(v2_new - v2)) < _ROW_TOL:
                v2 = v2_new
                break
            v2 = v2_new
    return uv1, np.column_stack([u2, v2])


def project_rs(
    X, motion: MotionEstimate, rig: RigConfig, mode: str = "exact"
) -> tuple[ImagePoint, ImagePoint]:
    """Rolling-shutter projection; the row is solved implicitly per camera."""
    X = np.asarray(X, dtype=float)
    Xt = (X[:3] / X[3] if X.shape[0] == 4 else X)[None, :]
    uv1, uv2 = _project_rs_batch(Xt, motion, rig, mode)
    return ImagePoint(*uv1[0]), ImagePoint(*uv2[0])


def motion_from_config(cfg: SceneConfig, min_depth: float) -> MotionEstimate:
    """Per-frame sweep parameters -> per-row-unit ground-truth motion."""
    axis = np.asarray(cfg.omega_axis, dtype=float)
    if np.linalg.norm(axis) > 0:
        axis = axis / np.linalg.norm(axis)
    omega = np.deg2rad(cfg.omega_deg_per_frame) / cfg.row_span * axis
    tdir = np.asarray(cfg.trans_direction, dtype=float)
    if np.linalg.norm(tdir) > 0:
        tdir = tdir / np.linalg.norm(tdir)
    t = cfg.trans_frac_per_frame * min_depth / cfg.row_span * tdir
    return MotionEstimate(omega, t, MotionModel.SIXDOF, scale_known=True)


def generate_scene(
    cfg: SceneConfig, seed: int
) -> tuple[SyntheticScene, list[Correspondence], np.ndarray]:
    """Deterministic synthetic scene; returns (scene, correspondences, inlier mask)."""
    if cfg.n_points < 1:
        raise EmptyScene("n_points must be >= 1")
    if not 0.0 <= cfg.omega_deg_per_frame <= 30.0 + 1e-9:
        raise ValueError("angular velocity must lie in [0, 30] deg/frame")
    if cfg.trans_frac_per_frame > 0.1 + 1e-9:
        raise ValueError("translational velocity must be <= min depth / 10 per frame")

    rng = np.random.default_rng(seed)
    depths = rng.uniform(*cfg.depth_range, size=cfg.n_points)
    lat = rng.uniform(-cfg.lateral_extent, cfg.lateral_extent, size=(cfg.n_points, 2))
    Xt = np.column_stack([lat[:, 0] * depths, lat[:, 1] * depths, depths])
    min_depth = float(np.min(depths))

    motion = motion_from_config(cfg, min_depth)
    bdir = np.asarray(cfg.baseline_direction, dtype=float)
    if np.linalg.norm(bdir) > 0:
        bdir = bdir / np.linalg.norm(bdir)
    rig = RigConfig(baseline=cfg.baseline_ratio * min_depth * bdir)

    uv1, uv2 = _project_rs_batch(Xt, motion, rig, cfg.mode)

    sigma = cfg.sigma_px / cfg.focal_px
    if sigma > 0.0:
        uv1 = uv1 + rng.normal(scale=sigma, size=uv1.shape)
        uv2 = uv2 + rng.normal(scale=sigma, size=uv2.shape)

    inlier = np.ones(cfg.n_points, dtype=bool)
    if cfg.outlier_fraction > 0.0:
        n_out = int(round(cfg.outlier_fraction * cfg.n_points))
        out_idx = rng.choice(cfg.n_points, size=n_out, replace=False)
        half_w = 1.536  # 3072-px sensor at focal 1000
        half_h = cfg.row_span / 2.0
        uv2[out_idx, 0] = rng.uniform(-half_w, half_w, size=n_out)
        uv2[out_idx, 1] = rng.uniform(-half_h, half_h, size=n_out)
        inlier[out_idx] = False

    scene = SyntheticScene(
        points=np.column_stack([Xt, np.ones(cfg.n_points)]),
        motion=motion,
        rig=rig,
        noise_sigma_px=cfg.sigma_px,
        focal_px=cfg.focal_px,
        seed=seed,
        min_depth=min_depth,
        config=cfg,
    )
    corrs = [
        Correspondence(ImagePoint(*p1), ImagePoint(*p2)) for p1, p2 in zip(uv1, uv2)
    ]
    return scene, corrs, inlier


def _default_texture(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Smooth band-limited procedural texture over plane coordinates."""
    s = (
        np.sin(2.3 * x) * np.cos(1.7 * y)
        + 0.6 * np.sin(4.1 * x + 0.9 * y)
        + 0.5 * np.cos(1.1 * x - 3.2 * y)
        + 0.35 * np.sin(5.3 * x - 1.3 * y + 0.7)
    )
    return 0.5 + 0.5 * s / 2.45


def render_plane_pair(
    motion: MotionEstimate,
    rig: RigConfig,
    width: int,
    height: int,
    focal_px: float,
    plane_depth: float = 10.0,
    texture=None,
    mode: str = "exact",
):
    """Render a fronto-parallel textured plane through the RS model.

    Returns (rs image 1, rs image 2, GS reference image, flow12, flow21)
    as dense oracles for the translation rectification pipeline.  Flow is
    exact (plane geometry), in pixels, and follows the convention that the
    second image is flipped 180 degrees into the first image's orientation
    before flow is measured (matching how an optical-flow network would be
    run on such a pair); flow21 maps flipped-image-2 pixels to image 1.
    """
    from .rectify import FlowField, Raster

    if texture is None:
        texture = _default_texture
    if mode != "exact":
        raise ValueError("plane rendering supports exact mode only")
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    ys, xs = np.mgrid[0:height, 0:width]
    u = (xs - cx) / focal_px
    v = (ys - cy) / focal_px
    npx = height * width
    uh = np.stack([u, v, np.ones_like(u)], axis=-1).reshape(npx, 3)
    Rr, b, t, omega = rig.relative_rotation, rig.baseline, motion.t, motion.omega

    def plane_point_cam(uh_flat, v_flat, camera):
        # X = R(v)^T (lam u - a(v)) with a(v) = v t (+ baseline for cam 2);
        # plane X_3 = D fixes lam.
        a = v_flat[:, None] * t[None, :]
        if camera == 2:
            a = a + b[None, :]
            dirs = _rotate_batch(-omega, v_flat, uh_flat @ Rr)
        else:
            dirs = _rotate_batch(-omega, v_flat, uh_flat)
        oz = _rotate_batch(-omega, v_flat, a)
        lam = (plane_depth + oz[:, 2]) / dirs[:, 2]
        X = lam[:, None] * dirs - oz
        return X, lam

    # the two RS views as captured (image 2 upside down relative to image 1)
    out_imgs = []
    for cam in (1, 2):
        X, lam = plane_point_cam(uh, v.reshape(-1), cam)
        ok = lam > 0
        tex = texture(X[:, 0], X[:, 1])
        img = np.where(ok, tex, 0.0).reshape(height, width)
        out_imgs.append(Raster(img, ok.reshape(height, width)))
    # GS reference: X = (D u, D v, D)
    gs = Raster(texture(plane_depth * u, plane_depth * v).reshape(height, width))
    # flow 1 -> flipped 2: plane points seen by image-1 pixels, projected
    # into raw camera 2, expressed in flipped-image coordinates
    X1, lam1 = plane_point_cam(uh, v.reshape(-1), 1)
    _, uv2 = _project_rs_batch(X1, motion, rig, "exact")
    f12 = np.stack(
        [(-uv2[:, 0]) * focal_px + cx - xs.reshape(-1),
         (-uv2[:, 1]) * focal_px + cy - ys.reshape(-1)],
        axis=-1,
    ).reshape(height, width, 2)
    # flow flipped 2 -> 1: flipped pixel (x, y) is raw pixel (-u, -v)
    uh_flip = np.stack([-u, -v, np.ones_like(u)], axis=-1).reshape(npx, 3)
    X2, lam2 = plane_point_cam(uh_flip, -v.reshape(-1), 2)
    uv1, _ = _project_rs_batch(X2, motion, rig, "exact")
    f21 = np.stack(
        [uv1[:, 0] * focal_px + cx - xs.reshape(-1),
         uv1[:, 1] * focal_px + cy - ys.reshape(-1)],
        axis=-1,
    ).reshape(height, width, 2)
    return (
        out_imgs[0],
        out_imgs[1],
        gs,
        FlowField(f12, (lam1 > 0).reshape(height, width)),
        FlowField(f21, (lam2 > 0).reshape(height, width)),
    )


def interp_midpoint(corr: Correspondence) -> ImagePoint:
    """The err-interp baseline: midpoint of the point and its flipped match."""
    p, q = corr.first, corr.second
    return ImagePoint((p.u - q.u) / 2.0, (p.v - q.v) / 2.0)


def undistortion_error(
    corr: Correspondence,
    estimate: MotionEstimate,
    scene: SyntheticScene,
    point_index: int,
) -> float:
    """Pixel distance between the estimate's GS prediction and the GT GS point."""
    from . import rectify  # local import; rectify depends on solver machinery

    gs_pred = rectify.undistort_features([corr], estimate, scene.rig, strict=False)[0]
    if gs_pred is None:
        return float("inf")
    gs_true, _ = project_gs(scene.points[point_index], scene.rig)
    du = gs_pred.u - gs_true.u
    dv = gs_pred.v - gs_true.v
    return float(np.hypot(du, dv) * scene.focal_px)
