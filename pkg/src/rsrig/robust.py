"""Robust estimation: per-correspondence local fits (v1), LO-RANSAC (v2),
and the hybrid initialize-simple/refine-full scheme (v3).

Scoring uses the Sampson epipolar residual for models with translation
and the row-homography reprojection residual for rotation-only models
(the epipolar matrix vanishes at t = 0, so epipolar scoring carries no
signal there).  All randomness flows from a seeded generator whose
sample schedule is drawn up front, so results are reproducible and
independent of any internal parallelism.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import refine as refine_mod
from . import solvers
from .core import MotionEstimate, MotionModel, RigConfig, normalize_gauge
from .errors import (
    EmptyAfterFiltering,
    InsufficientCorrespondences,
    NoModelFound,
    RsRigError,
)

__all__ = [
    "Scoring",
    "RansacConfig",
    "RobustEstimate",
    "PreselectConfig",
    "score_residuals",
    "fit_local_v1",
    "fit_global_v2",
    "fit_hybrid_v3",
    "preselect_correspondences",
]


class Scoring(enum.Enum):
    EPIPOLAR_SAMPSON = "sampson"
    RS_HOMOGRAPHY = "homography"


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 200
    inlier_threshold: float = 2.0e-3  # 2 px at the declared 1000 px focal
    local_opt_rounds: int = 5
    seed: int = 0
    scoring: Scoring | None = None  # None: model-appropriate default

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.inlier_threshold <= 0.0:
            raise ValueError("inlier threshold must be positive")


@dataclass(frozen=True)
class RobustEstimate:
    motion: MotionEstimate
    inlier_mask: np.ndarray
    score: tuple  # (inlier count, summed truncated squared residual)

    def __post_init__(self):
        mask = np.asarray(self.inlier_mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "inlier_mask", mask)


def _default_scoring(model: MotionModel) -> Scoring:
    return Scoring.RS_HOMOGRAPHY if model is MotionModel.ROT else Scoring.EPIPOLAR_SAMPSON


def score_residuals(arr, motion: MotionEstimate, rig: RigConfig, scoring: Scoring):
    arr = solvers.corr_matrix(arr)
    if scoring is Scoring.RS_HOMOGRAPHY:
        return solvers.homography_residuals(arr, motion.omega, rig)
    return solvers.sampson_residuals(arr, motion, rig)


def _msac_score(res: np.ndarray, threshold: float) -> tuple:
    mask = res <= threshold
    trunc = float(np.sum(np.minimum(res, threshold) ** 2))
    return int(np.count_nonzero(mask)), trunc


def _better(score_a: tuple, score_b: tuple) -> bool:
    """True when a beats b: more inliers, then lower truncated residual."""
    if score_a[0] != score_b[0]:
        return score_a[0] > score_b[0]
    return score_a[1] < score_b[1]


def _solve_minimal(model: MotionModel, sub: np.ndarray, rig: RigConfig):
    """Candidate MotionEstimates from a minimal sample; [] on degeneracy."""
    try:
        if model is MotionModel.TX:
            solvers.solve_tx(_corr_of(sub[0]), rig)
            return [MotionEstimate(np.zeros(3), np.array([1.0, 0.0, 0.0]),
                                   MotionModel.TX, scale_known=False)]
        if model is MotionModel.TXY:
            _, (rx, ry) = solvers.solve_txy(_corr_of(sub[0]), rig)
            t = normalize_gauge(np.array([rx, ry, 0.0]))
            return [MotionEstimate(np.zeros(3), t, MotionModel.TXY, scale_known=False)]
        if model is MotionModel.TXYZ:
            return list(solvers.solve_txyz(sub, rig).candidates)
        if model is MotionModel.ROT:
            return list(solvers.solve_rotation(sub, rig).candidates)
        if model is MotionModel.SIXDOF:
            return list(solvers.solve_6dof(sub, rig).candidates)
        if model is MotionModel.SIXDOF_BASELINE:
            return list(solvers.solve_6dof_baseline(sub, rig).candidates)
    except RsRigError:
        return []
    raise ValueError(f"unknown model {model}")


def _corr_of(row: np.ndarray):
    from .core import Correspondence, ImagePoint

    return Correspondence(ImagePoint(row[0], row[1]), ImagePoint(row[2], row[3]))


def _local_optimize(arr, motion, rig, config, scoring, mask):
    """Up to local_opt_rounds of truncated-loss refinement with re-thresholding."""
    best_motion = motion
    res = score_residuals(arr, best_motion, rig, scoring)
    best_score = _msac_score(res, config.inlier_threshold)
    for _ in range(config.local_opt_rounds):
        inliers = arr[mask]
        if len(inliers) < solvers.MINIMAL_SET_SIZE[motion.model]:
            break
        try:
            refined = _refine_for_model(inliers, best_motion, rig, config.inlier_threshold)
        except RsRigError:
            break
        res = score_residuals(arr, refined, rig, scoring)
        score = _msac_score(res, config.inlier_threshold)
        if not _better(score, best_score):
            break
        best_motion = refined
        best_score = score
        mask = res <= config.inlier_threshold
    return best_motion, best_score, mask


def _refine_for_model(inliers, motion, rig, threshold):
    if motion.model is MotionModel.ROT:
        return refine_mod.refine_rotation(inliers, motion, rig, loss_threshold=threshold).motion
    if motion.model in (MotionModel.TX, MotionModel.TXY, MotionModel.TXYZ):
        return refine_mod.refine_translation(inliers, motion, rig, loss_threshold=threshold).motion
    return refine_mod.refine_6dof(inliers, motion, rig, loss_threshold=threshold).motion


def fit_global_v2(
    corrs,
    model: MotionModel,
    config: RansacConfig = RansacConfig(),
    rig: RigConfig = RigConfig(),
) -> RobustEstimate:
    """LO-RANSAC: sample minimal sets, score everything, locally optimize."""
    arr = solvers.corr_matrix(corrs)
    n = len(arr)
    m = solvers.MINIMAL_SET_SIZE[model]
    if n < m:
        raise InsufficientCorrespondences(f"need >= {m} correspondences, have {n}")
    scoring = config.scoring or _default_scoring(model)
    rng = np.random.default_rng(config.seed)
    schedule = [rng.choice(n, size=m, replace=False) for _ in range(config.iterations)]

    best = None
    best_score = (-1, np.inf)
    best_mask = np.zeros(n, dtype=bool)
    for sample in schedule:
        for cand in _solve_minimal(model, arr[sample], rig):
            res = score_residuals(arr, cand, rig, scoring)
            score = _msac_score(res, config.inlier_threshold)
            if not _better(score, best_score):
                continue
            mask = res <= config.inlier_threshold
            cand, score, mask = _local_optimize(arr, cand, rig, config, scoring, mask)
            if _better(score, best_score):
                best, best_score, best_mask = cand, score, mask
    if best is None:
        raise NoModelFound("all samples were degenerate")
    return RobustEstimate(best, best_mask, best_score)


def fit_hybrid_v3(
    corrs,
    init_model: MotionModel,
    config: RansacConfig = RansacConfig(),
    rig: RigConfig = RigConfig(),
) -> RobustEstimate:
    """v2 sampling with a simple initializer, full 6DOF refinement in LO."""
    arr = solvers.corr_matrix(corrs)
    n = len(arr)
    m = solvers.MINIMAL_SET_SIZE[init_model]
    if n < m:
        raise InsufficientCorrespondences(f"need >= {m} correspondences, have {n}")
    scoring = config.scoring or Scoring.EPIPOLAR_SAMPSON
    rng = np.random.default_rng(config.seed)
    schedule = [rng.choice(n, size=m, replace=False) for _ in range(config.iterations)]

    best = None
    best_score = (-1, np.inf)
    best_mask = np.zeros(n, dtype=bool)
    for sample in schedule:
        for cand in _solve_minimal(init_model, arr[sample], rig):
            full = MotionEstimate(
                cand.omega, normalize_gauge(cand.t) if np.any(cand.t) else cand.t,
                MotionModel.SIXDOF, scale_known=False,
            )
            res = score_residuals(arr, full, rig, scoring)
            score = _msac_score(res, config.inlier_threshold)
            if not _better(score, best_score):
                continue
            mask = res <= config.inlier_threshold
            full, score, mask = _local_optimize(arr, full, rig, config, scoring, mask)
            if _better(score, best_score):
                best, best_score, best_mask = full, score, mask
    if best is None:
        raise NoModelFound("all samples were degenerate")
    return RobustEstimate(best, best_mask, best_score)


def fit_local_v1(
    corrs,
    model: MotionModel,
    seed: int = 0,
    rig: RigConfig = RigConfig(),
):
    """Fit a motion model at each correspondence individually.

    Draws the (minimal - 1) extra correspondences at random and undistorts
    just the anchor correspondence.  There is no redundancy: every
    candidate fits its minimal set exactly, so multi-root solvers are
    disambiguated purely locally by a smallest-motion prior, and nothing
    rejects outliers or bad partner draws.
    Returns (per-correspondence motions, undistorted points).
    """
    from . import rectify

    arr = solvers.corr_matrix(corrs)
    n = len(arr)
    m = solvers.MINIMAL_SET_SIZE[model]
    if n < m:
        raise InsufficientCorrespondences(f"need >= {m} correspondences, have {n}")
    rng = np.random.default_rng(seed)
    motions, points = [], []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        cand_best, size_best = None, np.inf
        for _ in range(4):  # retry degenerate partner draws
            partners = rng.choice(others, size=m - 1, replace=False) if m > 1 else []
            sample = arr[np.concatenate([[i], partners]).astype(int)]
            for cand in _solve_minimal(model, sample, rig):
                size = float(np.linalg.norm(cand.omega)) + 0.1 * float(
                    np.linalg.norm(cand.t) if not cand.scale_known else 0.0
                )
                if size < size_best:
                    cand_best, size_best = cand, size
            if cand_best is not None:
                break
        if cand_best is None:
            motions.append(None)
            points.append(None)
            continue
        motions.append(cand_best)
        points.append(rectify.undistort_features(arr[i : i + 1], cand_best, rig, strict=False)[0])
    return motions, points


@dataclass(frozen=True)
class PreselectConfig:
    """Stratified correspondence pre-selection for flow-derived matches."""

    center_half_width: float = 0.05 * 2.048  # 5% of image height, normalized
    row_bins: int = 4
    disp_bins: int = 4
    per_bin: int = 32
    min_quota: int = 4
    seed: int = 0


def preselect_correspondences(corrs, config: PreselectConfig = PreselectConfig()):
    """Balanced subset over temporal displacement and flow magnitude.

    Correspondences inside the center band (|v| below the half-width,
    where both shutters fire near-simultaneously) are dropped; the rest
    are binned over |v - v'| and apparent displacement, and each bin
    contributes up to its quota (at least ``min_quota`` where populated).
    Returns indices into the input list.
    """
    arr = solvers.corr_matrix(corrs)
    keep = np.abs(arr[:, 1]) >= config.center_half_width
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        raise EmptyAfterFiltering("no correspondences outside the center band")
    sub = arr[idx]
    temporal = np.abs(sub[:, 1] - sub[:, 3])
    disp = np.hypot(sub[:, 0] + sub[:, 2], sub[:, 1] + sub[:, 3])
    rng = np.random.default_rng(config.seed)

    def bin_edges(x, k):
        qs = np.quantile(x, np.linspace(0.0, 1.0, k + 1))
        qs[0] -= 1e-12
        qs[-1] += 1e-12
        return qs

    te = bin_edges(temporal, config.row_bins)
    de = bin_edges(disp, config.disp_bins)
    tbin = np.clip(np.searchsorted(te, temporal) - 1, 0, config.row_bins - 1)
    dbin = np.clip(np.searchsorted(de, disp) - 1, 0, config.disp_bins - 1)
    chosen = []
    for tb in range(config.row_bins):
        for db in range(config.disp_bins):
            members = np.nonzero((tbin == tb) & (dbin == db))[0]
            if members.size == 0:
                continue
            quota = max(config.per_bin, config.min_quota)
            if members.size <= quota:
                chosen.append(members)
            else:
                chosen.append(rng.choice(members, size=quota, replace=False))
    sel = np.sort(np.concatenate(chosen))
    return idx[sel]
