"""Global-shutter synthesis: rotation warping, dense translation
undistortion (depth maps, occlusion masks, final render), and sparse
feature undistortion.

Dense rasters use pixel grids with the principal point at the grid
center; ``focal_px`` converts to the normalized coordinates the motion
models live in.  The default matches the declared benchmark analogue
(1000 px focal for a 3072 px wide sensor).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    ImagePoint,
    MotionEstimate,
    MotionModel,
    RigConfig,
    rotation_from_axis_angle,
)
from .errors import (
    BehindCamera,
    DegenerateBaseline,
    DimensionMismatch,
    NonPositiveDepth,
)
from .solvers import corr_matrix

__all__ = [
    "Raster",
    "FlowField",
    "DepthMap",
    "OcclusionMask",
    "RowGateConfig",
    "default_focal",
    "DEFAULT_CENTER_BAND",
    "undistort_point_rotation",
    "warp_image_rotation",
    "distort_image_rotation",
    "fuse_warped",
    "filter_flow",
    "triangulate_rowpair",
    "build_depth_maps",
    "build_occlusion_masks",
    "render_gs_translation",
    "undistort_features",
]

# half-width of the unreliable simultaneous-rows band, in normalized rows
# (5% of the 2048-row / 1000 px-focal sensor analogue)
DEFAULT_CENTER_BAND = 0.05 * 2.048


def default_focal(width: int) -> float:
    return width * (1000.0 / 3072.0)


@dataclass
class Raster:
    """Dense intensity image in [0, 1] with per-pixel validity."""

    samples: np.ndarray
    valid: np.ndarray = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim == 2:
            pass
        elif self.samples.ndim == 3 and self.samples.shape[2] in (1, 3):
            if self.samples.shape[2] == 1:
                self.samples = self.samples[:, :, 0]
        else:
            raise ValueError("raster must be (H, W) or (H, W, {1,3})")
        if self.samples.shape[0] < 1 or self.samples.shape[1] < 1:
            raise ValueError("raster dimensions must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("raster samples must be finite")
        if self.valid is None:
            self.valid = np.ones(self.samples.shape[:2], dtype=bool)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
            if self.valid.shape != self.samples.shape[:2]:
                raise ValueError("validity mask shape mismatch")

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 2 else self.samples.shape[2]


@dataclass
class FlowField:
    """Per-pixel displacement in pixels; invalid pixels carry no semantics."""

    flow: np.ndarray  # (H, W, 2)
    valid: np.ndarray

    def __post_init__(self):
        self.flow = np.asarray(self.flow, dtype=float)
        if self.flow.ndim != 3 or self.flow.shape[2] != 2:
            raise ValueError("flow must be (H, W, 2)")
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.flow.shape[:2]:
            raise ValueError("validity mask shape mismatch")

    @property
    def height(self) -> int:
        return self.flow.shape[0]

    @property
    def width(self) -> int:
        return self.flow.shape[1]


@dataclass
class DepthMap:
    depth: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.depth.shape:
            raise ValueError("validity mask shape mismatch")
        if np.any(self.depth[self.valid] <= 0.0):
            raise ValueError("valid depths must be positive")


@dataclass
class OcclusionMask:
    """Whether each pixel may be filled from the associated source image."""

    allowed: np.ndarray

    def __post_init__(self):
        self.allowed = np.asarray(self.allowed, dtype=bool)


@dataclass(frozen=True)
class RowGateConfig:
    """Forward-backward tolerance and the row-distance flow gate (pixels)."""

    tolerance_px: float = 1.0
    gate_offset_px: float = 2.0
    gate_slope: float = 2.0  # max |flow| grows by this much per row off center


# --------------------------------------------------------------------------
# pixel <-> normalized helpers
# --------------------------------------------------------------------------

def _grid_normalized(h: int, w: int, focal: float):
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w]
    return (xs - cx) / focal, (ys - cy) / focal


def _to_pixels(u, v, h, w, focal):
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    return u * focal + cx, v * focal + cy


def _bilinear(img: Raster, x: np.ndarray, y: np.ndarray):
    """Sample at pixel coordinates; returns (values, valid)."""
    h, w = img.height, img.width
    inb = (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)
    xc = np.clip(x, 0, w - 1)
    yc = np.clip(y, 0, h - 1)
    x0 = np.minimum(np.floor(xc).astype(int), w - 2) if w > 1 else np.zeros_like(xc, int)
    y0 = np.minimum(np.floor(yc).astype(int), h - 2) if h > 1 else np.zeros_like(yc, int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    # snap to exact pixels so identity warps reproduce inputs bitwise
    fx = np.where(fx < 1e-9, 0.0, np.where(fx > 1.0 - 1e-9, 1.0, fx))
    fy = np.where(fy < 1e-9, 0.0, np.where(fy > 1.0 - 1e-9, 1.0, fy))
    ok = (
        inb
        & img.valid[y0, x0]
        & img.valid[y0, x1]
        & img.valid[y1, x0]
        & img.valid[y1, x1]
    )
    if img.channels == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    s = (
        img.samples[y0, x0] * (1 - fx) * (1 - fy)
        + img.samples[y0, x1] * fx * (1 - fy)
        + img.samples[y1, x0] * (1 - fx) * fy
        + img.samples[y1, x1] * fx * fy
    )
    return s, ok


def _rotate_rows(omega, v_rows: np.ndarray, pts: np.ndarray, transpose=False):
    """exp(v_i [w]_x) pts_i (or its transpose applied), batched over rows."""
    omega = np.asarray(omega, dtype=float)
    nrm = np.linalg.norm(omega)
    if nrm == 0.0:
        return pts.copy()
    a = omega / nrm
    th = v_rows * nrm
    if transpose:
        th = -th
    s = np.sin(th)[..., None]
    c = (1.0 - np.cos(th))[..., None]
    ax = np.cross(a, pts)
    return pts + s * ax + c * np.cross(a, ax)


# --------------------------------------------------------------------------
# rotation warping
# --------------------------------------------------------------------------

def undistort_point_rotation(p: ImagePoint, omega) -> ImagePoint:
    """Forward mapping of one point: dehom(R_w(v)^T [u, v, 1])."""
    h = rotation_from_axis_angle(omega, p.v).T @ p.homogeneous()
    if h[2] <= 0.0:
        raise BehindCamera("undistorted point maps behind the camera")
    return ImagePoint(h[0] / h[2], h[1] / h[2])


def warp_image_rotation(
    img: Raster,
    omega,
    direction: str = "backward",
    focal_px: float | None = None,
    camera: int = 1,
    rig: RigConfig | None = None,
    iters: int = 20,
    tol_rows: float = 1e-6,
) -> Raster:
    """Warp a rotation-distorted RS image into global-shutter geometry.

    Backward mode solves v = row(R_w(v) u_g) per output pixel by fixed
    point iteration starting at the output row; forward mode splats each
    input pixel at its mapped location in row order.  Unreachable output
    pixels are marked invalid.  ``camera=2`` warps the second (rig-rotated)
    image into the same virtual GS plane.
    """
    focal = focal_px or default_focal(img.width)
    h, w = img.height, img.width
    Rr2 = None
    if camera == 2:
        Rr2 = (rig or RigConfig()).relative_rotation
    elif camera != 1:
        raise ValueError("camera must be 1 or 2")
    if direction == "backward":
        ug, vg = _grid_normalized(h, w, focal)
        pts = np.stack([ug, vg, np.ones_like(ug)], axis=-1)
        v = vg if Rr2 is None else (pts @ Rr2.T)[..., 1] / (pts @ Rr2.T)[..., 2]
        v = v.copy()
        ok = np.ones_like(v, dtype=bool)
        hvec = pts
        for _ in range(iters):
            hvec = _rotate_rows(omega, v, pts)
            if Rr2 is not None:
                hvec = hvec @ Rr2.T
            good = hvec[..., 2] > 1e-9
            v_new = np.where(good, hvec[..., 1] / np.where(good, hvec[..., 2], 1.0), v)
            done = np.abs(v_new - v) < tol_rows / focal
            v = v_new
            ok &= good
            if np.all(done | ~ok):
                break
        else:
            ok &= np.abs(v - hvec[..., 1] / np.where(hvec[..., 2] > 1e-9, hvec[..., 2], 1.0)) < 1e-3 / focal
        hvec = _rotate_rows(omega, v, pts)
        if Rr2 is not None:
            hvec = hvec @ Rr2.T
        u = hvec[..., 0] / np.where(hvec[..., 2] > 1e-9, hvec[..., 2], 1.0)
        x, y = _to_pixels(u, v, h, w, focal)
        samples, valid = _bilinear(img, x, y)
        valid &= ok
        out = np.zeros_like(img.samples)
        out[valid] = samples[valid]
        return Raster(out, valid)
    if direction != "forward":
        raise ValueError("direction must be 'forward' or 'backward'")
    u, v = _grid_normalized(h, w, focal)
    pts = np.stack([u, v, np.ones_like(u)], axis=-1)
    if Rr2 is not None:
        pts = pts @ Rr2  # R_r^T row-wise
    g = _rotate_rows(omega, v, pts, transpose=True)
    good = g[..., 2] > 1e-9
    ug = g[..., 0] / np.where(good, g[..., 2], 1.0)
    vg = g[..., 1] / np.where(good, g[..., 2], 1.0)
    x, y = _to_pixels(ug, vg, h, w, focal)
    xi = np.round(x).astype(int)
    yi = np.round(y).astype(int)
    good &= (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h) & img.valid
    out = np.zeros_like(img.samples)
    valid = np.zeros((h, w), dtype=bool)
    out[yi[good], xi[good]] = img.samples[good]
    valid[yi[good], xi[good]] = True
    return Raster(out, valid)


def distort_image_rotation(gs: Raster, omega, focal_px: float | None = None) -> Raster:
    """Synthesize the rolling-shutter view of a GS image (test oracle)."""
    focal = focal_px or default_focal(gs.width)
    h, w = gs.height, gs.width
    u, v = _grid_normalized(h, w, focal)
    pts = np.stack([u, v, np.ones_like(u)], axis=-1)
    g = _rotate_rows(omega, v, pts, transpose=True)
    good = g[..., 2] > 1e-9
    x, y = _to_pixels(
        g[..., 0] / np.where(good, g[..., 2], 1.0),
        g[..., 1] / np.where(good, g[..., 2], 1.0),
        h, w, focal,
    )
    samples, valid = _bilinear(gs, x, y)
    valid &= good
    out = np.zeros_like(gs.samples)
    out[valid] = samples[valid]
    return Raster(out, valid)


def fuse_warped(img1: Raster, img2: Raster) -> Raster:
    """Average where both warps are valid, copy where only one is."""
    if img1.samples.shape != img2.samples.shape:
        raise DimensionMismatch("fused inputs must share dimensions")
    both = img1.valid & img2.valid
    only1 = img1.valid & ~img2.valid
    only2 = img2.valid & ~img1.valid
    out = np.zeros_like(img1.samples)
    out[both] = 0.5 * (img1.samples[both] + img2.samples[both])
    out[only1] = img1.samples[only1]
    out[only2] = img2.samples[only2]
    return Raster(out, img1.valid | img2.valid)


# --------------------------------------------------------------------------
# flow filtering
# --------------------------------------------------------------------------

def filter_flow(
    flow12: FlowField, flow21: FlowField, gate: RowGateConfig = RowGateConfig()
) -> FlowField:
    """Forward-backward consistency check plus the row-distance gate."""
    if flow12.flow.shape != flow21.flow.shape:
        raise DimensionMismatch("flow fields must share dimensions")
    h, w = flow12.height, flow12.width
    ys, xs = np.mgrid[0:h, 0:w].astype(float)
    xt = xs + flow12.flow[..., 0]
    yt = ys + flow12.flow[..., 1]
    back = Raster(np.zeros((h, w)), flow21.valid)
    # bilinear sample the backward flow at the forward targets
    fbx, okx = _bilinear(Raster(flow21.flow[..., 0], flow21.valid), xt, yt)
    fby, oky = _bilinear(Raster(flow21.flow[..., 1], flow21.valid), xt, yt)
    rt = np.hypot(flow12.flow[..., 0] + fbx, flow12.flow[..., 1] + fby)
    consistent = okx & oky & (rt <= gate.tolerance_px)
    mag = np.hypot(flow12.flow[..., 0], flow12.flow[..., 1])
    cy = (h - 1) / 2.0
    gate_max = gate.gate_offset_px + gate.gate_slope * np.abs(ys - cy)
    valid = flow12.valid & consistent & (mag <= gate_max)
    return FlowField(flow12.flow.copy(), valid)


# --------------------------------------------------------------------------
# triangulation and depth maps
# --------------------------------------------------------------------------

def _rays(arr: np.ndarray, motion: MotionEstimate, rig: RigConfig):
    """Per-correspondence ray origins and directions in the GS frame."""
    n = len(arr)
    v, vp = arr[:, 1], arr[:, 3]
    u1 = np.column_stack([arr[:, 0], v, np.ones(n)])
    u2 = np.column_stack([arr[:, 2], vp, np.ones(n)])
    t, b, Rr = motion.t, rig.baseline, rig.relative_rotation
    # camera 1 row pose: x_cam = R(v) X + v t
    o1 = -_rotate_rows(motion.omega, -v, v[:, None] * t[None, :])
    d1 = _rotate_rows(motion.omega, v, u1, transpose=True)
    o2 = -_rotate_rows(motion.omega, -vp, vp[:, None] * t[None, :] + b[None, :])
    d2 = _rotate_rows(motion.omega, vp, u2 @ Rr, transpose=True)
    return o1, d1, o2, d2


def _midpoint(o1, d1, o2, d2):
    """Midpoint of closest approach between ray pairs; batched."""
    d1n = d1 / np.linalg.norm(d1, axis=-1, keepdims=True)
    d2n = d2 / np.linalg.norm(d2, axis=-1, keepdims=True)
    r = o2 - o1
    a = np.einsum("ni,ni->n", d1n, d2n)
    b1 = np.einsum("ni,ni->n", d1n, r)
    b2 = np.einsum("ni,ni->n", d2n, r)
    denom = 1.0 - a ** 2
    ok = denom > 1e-12
    dn = np.where(ok, denom, 1.0)
    s = (b1 - a * b2) / dn
    tt = (a * b1 - b2) / dn
    X = 0.5 * (o1 + s[:, None] * d1n + o2 + tt[:, None] * d2n)
    return X, s, tt, ok


def triangulate_rowpair(
    corr,
    motion: MotionEstimate,
    rig: RigConfig = RigConfig(),
    min_row_gap: float = DEFAULT_CENTER_BAND,
) -> np.ndarray:
    """Midpoint triangulation from the two row poses, in the GS frame."""
    arr = corr_matrix([corr] if not isinstance(corr, (list, np.ndarray)) else corr)
    if abs(arr[0, 1] - arr[0, 3]) < min_row_gap:
        raise DegenerateBaseline("row pair too close in time to triangulate")
    motion = resolve_translation_sign(arr, motion, rig)
    o1, d1, o2, d2 = _rays(arr, motion, rig)
    X, s, tt, ok = _midpoint(o1, d1, o2, d2)
    if not ok[0]:
        raise DegenerateBaseline("rays are parallel")
    if s[0] <= 0.0 or tt[0] <= 0.0 or X[0, 2] <= 0.0:
        raise BehindCamera("triangulated point behind a camera")
    return X[0]


def _flow_to_corrs(flow: FlowField, focal: float, reverse: bool):
    """Valid flow pixels -> correspondence rows [u1 v1 u2 v2].

    Flow follows the flipped-second-image convention (image 2 rotated 180
    degrees into image 1's orientation before flow is measured); the raw
    second-camera coordinates are recovered by negation.
    """
    h, w = flow.height, flow.width
    ys, xs = np.mgrid[0:h, 0:w]
    m = flow.valid
    x0, y0 = xs[m].astype(float), ys[m].astype(float)
    x1 = x0 + flow.flow[..., 0][m]
    y1 = y0 + flow.flow[..., 1][m]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    p0 = np.column_stack([(x0 - cx) / focal, (y0 - cy) / focal])
    p1 = np.column_stack([(x1 - cx) / focal, (y1 - cy) / focal])
    if reverse:
        # source pixels live in the flipped second image, targets in image 1
        return np.column_stack([p1, -p0])
    return np.column_stack([p0, -p1])


def build_depth_maps(
    flow12: FlowField,
    flow21: FlowField,
    motion: MotionEstimate,
    rig: RigConfig = RigConfig(),
    focal_px: float | None = None,
    center_band: float = DEFAULT_CENTER_BAND,
) -> tuple[DepthMap, DepthMap]:
    """Triangulate every valid flow pixel and splat depth at its GS pixel."""
    focal = focal_px or default_focal(flow12.width)
    if not motion.scale_known and np.any(motion.t):
        probe = _flow_to_corrs(flow12, focal, False)
        if len(probe):
            motion = resolve_translation_sign(probe[:256], motion, rig)
    out = []
    for flow, reverse in ((flow12, False), (flow21, True)):
        h, w = flow.height, flow.width
        arr = _flow_to_corrs(flow, focal, reverse)
        depth = np.full((h, w), np.inf)
        if len(arr):
            gap_ok = np.abs(arr[:, 1] - arr[:, 3]) >= center_band
            o1, d1, o2, d2 = _rays(arr[gap_ok], motion, rig)
            X, s, tt, ok = _midpoint(o1, d1, o2, d2)
            ok &= (s > 0) & (tt > 0) & (X[:, 2] > 0)
            X = X[ok]
            if len(X):
                ug = X[:, 0] / X[:, 2]
                vg = X[:, 1] / X[:, 2]
                band_ok = np.abs(vg) >= center_band
                X = X[band_ok]
                xpix, ypix = _to_pixels(ug[band_ok], vg[band_ok], h, w, focal)
                xi = np.round(xpix).astype(int)
                yi = np.round(ypix).astype(int)
                inb = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
                np.minimum.at(depth, (yi[inb], xi[inb]), X[inb, 2])
        valid = np.isfinite(depth)
        depth[~valid] = 0.0
        depth[valid & (depth <= 0.0)] = 0.0
        valid &= depth > 0.0
        out.append(DepthMap(np.where(valid, depth, 0.0), valid))
    return out[0], out[1]


def build_occlusion_masks(
    d1: DepthMap, d2: DepthMap, agreement: float = 0.02
) -> tuple[OcclusionMask, OcclusionMask]:
    """Nearer depth wins; within the agreement margin both sources allowed."""
    if d1.depth.shape != d2.depth.shape:
        raise DimensionMismatch("depth maps must share dimensions")
    both = d1.valid & d2.valid
    close = np.zeros_like(both)
    nearer1 = np.zeros_like(both)
    denom = np.minimum(np.where(d1.valid, d1.depth, np.inf), np.where(d2.valid, d2.depth, np.inf))
    with np.errstate(invalid="ignore"):
        close[both] = (
            np.abs(d1.depth[both] - d2.depth[both]) <= agreement * denom[both]
        )
    nearer1[both] = d1.depth[both] < d2.depth[both]
    allow1 = (d1.valid & ~d2.valid) | (both & (close | nearer1))
    allow2 = (d2.valid & ~d1.valid) | (both & (close | ~nearer1))
    return OcclusionMask(allow1), OcclusionMask(allow2)


def _project_rs_pixels(X: np.ndarray, motion, rig, camera: int, iters=50):
    """Implicit RS projection of GS-frame points into one camera; batched."""
    Rr, b, t = rig.relative_rotation, rig.baseline, motion.t

    def fwd(v):
        Y = _rotate_rows(motion.omega, v, X) + v[:, None] * t[None, :]
        if camera == 2:
            Y = Y @ Rr.T + (Rr @ b)[None, :]
        return Y

    if camera == 1:
        v = X[:, 1] / X[:, 2]
    else:
        g = X @ Rr.T + (Rr @ b)[None, :]
        v = g[:, 1] / g[:, 2]
    ok = np.ones(len(X), dtype=bool)
    for _ in range(iters):
        Y = fwd(v)
        good = Y[:, 2] > 1e-9
        v_new = np.where(good, Y[:, 1] / np.where(good, Y[:, 2], 1.0), v)
        ok &= good
        if np.max(np.abs(v_new - v)) < 1e-10:
            v = v_new
            break
        v = v_new
    Y = fwd(v)
    u = Y[:, 0] / Y[:, 2]
    return u, v, ok & (Y[:, 2] > 0)


def render_gs_translation(
    img1: Raster,
    img2: Raster,
    fused_depth: DepthMap,
    masks: tuple[OcclusionMask, OcclusionMask],
    motion: MotionEstimate,
    rig: RigConfig = RigConfig(),
    focal_px: float | None = None,
    center_band: float = DEFAULT_CENTER_BAND,
) -> tuple[Raster, np.ndarray]:
    """Backproject the fused depth and sample the unoccluded source images.

    The center band (depth unobservable there) is filled by direct
    interpolation of the two inputs.  Returns the render plus a flag map:
    0 invalid, 1 geometric, 2 interpolated.
    """
    focal = focal_px or default_focal(img1.width)
    h, w = fused_depth.depth.shape
    ug, vg = _grid_normalized(h, w, focal)
    out = np.zeros_like(img1.samples)
    acc_w = np.zeros((h, w))
    flags = np.zeros((h, w), dtype=np.uint8)

    sel = fused_depth.valid & (np.abs(vg) >= center_band)
    if np.any(sel):
        X = np.stack([ug[sel], vg[sel], np.ones(np.count_nonzero(sel))], axis=-1)
        X = X * fused_depth.depth[sel][:, None]
        for cam, img, mask in ((1, img1, masks[0]), (2, img2, masks[1])):
            allowed = mask.allowed[sel]
            u, v, ok = _project_rs_pixels(X, motion, rig, cam)
            x, y = _to_pixels(u, v, img.height, img.width, focal)
            vals, okb = _bilinear(img, x, y)
            use = allowed & ok & okb
            tgt = np.zeros(np.count_nonzero(sel), dtype=bool)
            tgt[:] = use
            idx = np.nonzero(sel)
            if img.channels == 3:
                out[idx[0][use], idx[1][use]] += vals[use]
            else:
                out[idx[0][use], idx[1][use]] += vals[use]
            acc_w[idx[0][use], idx[1][use]] += 1.0
        got = acc_w > 0
        if img1.channels == 3:
            out[got] /= acc_w[got][:, None]
        else:
            out[got] /= acc_w[got]
        flags[got] = 1

    # center band: direct interpolation of the two inputs
    band = np.abs(vg) < center_band
    if np.any(band):
        x1, y1 = _to_pixels(ug[band], vg[band], img1.height, img1.width, focal)
        s1, ok1 = _bilinear(img1, x1, y1)
        p2 = np.stack([ug[band], vg[band], np.ones(np.count_nonzero(band))], axis=-1)
        g2 = p2 @ rig.relative_rotation.T
        x2, y2 = _to_pixels(g2[:, 0] / g2[:, 2], g2[:, 1] / g2[:, 2],
                            img2.height, img2.width, focal)
        s2, ok2 = _bilinear(img2, x2, y2)
        sboth = np.where(
            (ok1 & ok2)[..., None] if img1.channels == 3 else (ok1 & ok2),
            0.5 * (s1 + s2),
            np.where(ok1[..., None] if img1.channels == 3 else ok1, s1, s2),
        )
        okany = ok1 | ok2
        idx = np.nonzero(band)
        out[idx[0][okany], idx[1][okany]] = sboth[okany]
        flags[idx[0][okany], idx[1][okany]] = 2

    return Raster(out, flags > 0), flags


# --------------------------------------------------------------------------
# sparse feature undistortion
# --------------------------------------------------------------------------

def undistort_features(
    corrs, estimate: MotionEstimate, rig: RigConfig = RigConfig(), strict: bool = True
) -> list:
    """Model-appropriate GS mapping of each correspondence.

    With ``strict`` (default) mapping failures raise; otherwise the failed
    entries come back as None (used by benchmark error accounting, where a
    failed mapping counts as unbounded error).
    """
    arr = corr_matrix(corrs)
    model = estimate.model
    out: list = []
    if model is MotionModel.ROT:
        for row in arr:
            try:
                out.append(
                    undistort_point_rotation(ImagePoint(row[0], row[1]), estimate.omega)
                )
            except BehindCamera:
                if strict:
                    raise
                out.append(None)
        return out
    if model in (MotionModel.TX, MotionModel.TXY):
        # per-correspondence scale along the estimated direction
        n = len(arr)
        g = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)]) @ rig.relative_rotation
        g = g / g[:, 2:3]
        dv = arr[:, 1] - arr[:, 3]
        dv = np.where(np.abs(dv) < 1e-12, 1e-12, dv)
        delta = np.column_stack([arr[:, 0] - g[:, 0], arr[:, 1] - g[:, 1]])
        tdir = estimate.t[:2]
        denom = dv * np.einsum("i,i->", tdir, tdir)
        s = (delta @ tdir) / np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        ug = arr[:, 0] - s * tdir[0] * arr[:, 1]
        vg = arr[:, 1] - s * tdir[1] * arr[:, 1]
        return [ImagePoint(a, b) for a, b in zip(ug, vg)]
    if model is MotionModel.TXYZ:
        n = len(arr)
        u1 = np.column_stack([arr[:, 0], arr[:, 1], np.ones(n)])
        g = np.column_stack([arr[:, 2], arr[:, 3], np.ones(n)]) @ rig.relative_rotation
        dv = (arr[:, 1] - arr[:, 3])[:, None]
        rhs = dv * estimate.t[None, :]
        # least squares for (lambda, lambda') per correspondence
        A = np.stack([u1, -g], axis=-1)  # (n, 3, 2)
        AtA = np.einsum("nia,nib->nab", A, A) + 1e-18 * np.eye(2)
        Atb = np.einsum("nia,ni->na", A, rhs)
        lam = np.linalg.solve(AtA, Atb[..., None])[..., 0]
        hg = lam[:, 0:1] * u1 - arr[:, 1][:, None] * estimate.t[None, :]
        out = []
        for row in hg:
            if row[2] <= 0.0:
                if strict:
                    raise BehindCamera("undistorted point behind the camera")
                out.append(None)
            else:
                out.append(ImagePoint(row[0] / row[2], row[1] / row[2]))
        return out
    # full 6DOF: triangulate per row pair and project into the GS frame
    estimate = resolve_translation_sign(arr, estimate, rig)
    o1, d1, o2, d2 = _rays(arr, estimate, rig)
    X, s, tt, ok = _midpoint(o1, d1, o2, d2)
    for i in range(len(arr)):
        if not ok[i] or X[i, 2] <= 0.0:
            if strict:
                raise BehindCamera("triangulated point behind the camera")
            out.append(None)
        else:
            out.append(ImagePoint(X[i, 0] / X[i, 2], X[i, 1] / X[i, 2]))
    return out


def resolve_translation_sign(
    arr, estimate: MotionEstimate, rig: RigConfig
) -> MotionEstimate:
    """Pick the translation sign that triangulates in front of the cameras.

    The epipolar constraint is homogeneous in t, so scale-free estimates
    carry an arbitrary sign; triangulation does not.  No-op for estimates
    with known scale or zero translation.
    """
    if estimate.scale_known or not np.any(estimate.t):
        return estimate
    arr = corr_matrix(arr)

    def front_count(est):
        o1, d1, o2, d2 = _rays(arr, est, rig)
        X, s, tt, ok = _midpoint(o1, d1, o2, d2)
        return int(np.count_nonzero(ok & (s > 0) & (tt > 0) & (X[:, 2] > 0)))

    flipped = MotionEstimate(estimate.omega, -estimate.t, estimate.model,
                             scale_known=estimate.scale_known)
    return estimate if front_count(estimate) >= front_count(flipped) else flipped
