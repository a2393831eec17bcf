import numpy as np
import pytest

from rsrig import robust, solvers, synth
from rsrig.core import Correspondence, ImagePoint, MotionModel
from rsrig.errors import EmptyAfterFiltering, InsufficientCorrespondences
from tests.conftest import make_scene


class TestFitGlobalV2:
    def test_noiseless_all_inliers_gt(self):
        scene, corrs, _ = make_scene("6dof", seed=0, n_points=60, omega_deg=15.0,
                                     trans_frac=0.04, mode="exact")
        est = robust.fit_global_v2(corrs, MotionModel.SIXDOF,
                                   robust.RansacConfig(seed=1))
        assert est.inlier_mask.all()
        gt_t = scene.motion.t / (scene.motion.t[0] + scene.motion.t[1])
        assert np.linalg.norm(est.motion.omega - scene.motion.omega) < 1e-6
        assert np.linalg.norm(est.motion.t - gt_t) < 1e-6

    def test_outliers_excluded(self):
        scene, corrs, inlier = make_scene("6dof", seed=1, n_points=120,
                                          omega_deg=15.0, trans_frac=0.04,
                                          sigma_px=0.5, outliers=0.3, mode="exact")
        est = robust.fit_global_v2(corrs, MotionModel.SIXDOF,
                                   robust.RansacConfig(seed=2))
        n_out = (~inlier).sum()
        false_inliers = np.count_nonzero(est.inlier_mask & ~inlier)
        assert false_inliers <= 0.15 * n_out
        errs = [synth.undistortion_error(c, est.motion, scene, i)
                for i, c in enumerate(corrs) if inlier[i]]
        assert np.median(errs) < 2.0

    def test_deterministic(self):
        scene, corrs, _ = make_scene("rot", seed=2, n_points=50, omega_deg=12.0,
                                     sigma_px=0.5, mode="exact")
        a = robust.fit_global_v2(corrs, MotionModel.ROT, robust.RansacConfig(seed=5))
        b = robust.fit_global_v2(corrs, MotionModel.ROT, robust.RansacConfig(seed=5))
        assert np.array_equal(a.motion.omega, b.motion.omega)
        assert np.array_equal(a.inlier_mask, b.inlier_mask)
        assert a.score == b.score

    def test_inlier_soundness(self):
        scene, corrs, _ = make_scene("rot", seed=3, n_points=60, omega_deg=10.0,
                                     sigma_px=0.5, outliers=0.2, mode="exact")
        config = robust.RansacConfig(seed=3)
        est = robust.fit_global_v2(corrs, MotionModel.ROT, config)
        res = robust.score_residuals(solvers.corr_matrix(corrs), est.motion,
                                     scene.rig, robust.Scoring.RS_HOMOGRAPHY)
        assert np.all(res[est.inlier_mask] <= config.inlier_threshold)
        assert est.score[0] == int(est.inlier_mask.sum())

    def test_high_inlier_rate_on_noise_only_data(self):
        scene, corrs, _ = make_scene("6dof", seed=4, n_points=100, omega_deg=10.0,
                                     trans_frac=0.03, sigma_px=0.5, mode="exact")
        est = robust.fit_global_v2(corrs, MotionModel.SIXDOF,
                                   robust.RansacConfig(seed=4))
        assert est.inlier_mask.mean() >= 0.99

    def test_insufficient_correspondences(self):
        with pytest.raises(InsufficientCorrespondences):
            robust.fit_global_v2(
                [Correspondence(ImagePoint(0, 0.1), ImagePoint(0, -0.1))] * 3,
                MotionModel.SIXDOF)

    def test_txy_worse_than_rot_on_rotation_data(self):
        scene, corrs, _ = make_scene("rot", seed=5, n_points=80, omega_deg=14.0,
                                     sigma_px=0.5, mode="exact")
        e_rot = robust.fit_global_v2(corrs, MotionModel.ROT, robust.RansacConfig(seed=6))
        e_txy = robust.fit_global_v2(corrs, MotionModel.TXY, robust.RansacConfig(seed=6))
        err_rot = np.median([synth.undistortion_error(c, e_rot.motion, scene, i)
                             for i, c in enumerate(corrs)])
        err_txy = np.median([synth.undistortion_error(c, e_txy.motion, scene, i)
                             for i, c in enumerate(corrs)])
        assert err_rot < err_txy


class TestFitLocalV1:
    def test_exact_on_pure_translation(self):
        scene, corrs, _ = make_scene("txy", seed=6, n_points=30, trans_frac=0.05,
                                     mode="exact", tdir=(0.8, 0.6, 0.0))
        _, pts = robust.fit_local_v1(corrs, MotionModel.TXY, seed=1)
        for i, p in enumerate(pts):
            gs, _ = synth.project_gs(scene.points[i], scene.rig)
            assert np.hypot(p.u - gs.u, p.v - gs.v) < 1e-10

    def test_piecewise_approximation_of_rotation(self):
        scene, corrs, _ = make_scene("rot", seed=7, n_points=60, omega_deg=12.0,
                                     sigma_px=0.5, mode="exact")
        _, pts = robust.fit_local_v1(corrs, MotionModel.TXY, seed=2)
        errs = []
        for i, p in enumerate(pts):
            gs, _ = synth.project_gs(scene.points[i], scene.rig)
            errs.append(np.hypot(p.u - gs.u, p.v - gs.v) * 1000.0)
        assert np.median(errs) < 2.0  # piecewise translations absorb rotation

    def test_txy_variance_below_rot_variance(self):
        scene, corrs, _ = make_scene("rot", seed=8, n_points=60, omega_deg=12.0,
                                     sigma_px=0.5, mode="exact")
        def errors(model):
            _, pts = robust.fit_local_v1(corrs, model, seed=3)
            out = []
            for i, p in enumerate(pts):
                if p is None:
                    continue
                gs, _ = synth.project_gs(scene.points[i], scene.rig)
                out.append(np.hypot(p.u - gs.u, p.v - gs.v) * 1000.0)
            return np.array(out)

        e_txy = errors(MotionModel.TXY)
        e_rot = errors(MotionModel.ROT)
        assert np.var(e_txy[e_txy < 50]) <= np.var(e_rot[e_rot < 50])


class TestFitHybridV3:
    def test_v3_with_sixdof_init_matches_v2(self):
        scene, corrs, _ = make_scene("6dof", seed=9, n_points=60, omega_deg=12.0,
                                     trans_frac=0.04, sigma_px=0.5, mode="exact")
        cfg = robust.RansacConfig(seed=7)
        a = robust.fit_hybrid_v3(corrs, MotionModel.SIXDOF, cfg)
        b = robust.fit_global_v2(corrs, MotionModel.SIXDOF, cfg)
        assert np.array_equal(a.motion.omega, b.motion.omega)
        assert np.array_equal(a.motion.t, b.motion.t)

    def test_v3_txyz_converges_on_pure_translation(self):
        scene, corrs, _ = make_scene("txyz", seed=10, n_points=60, trans_frac=0.06,
                                     mode="exact", tdir=(0.6, 0.3, 0.2))
        est = robust.fit_hybrid_v3(corrs, MotionModel.TXYZ, robust.RansacConfig(seed=8))
        gt = scene.motion.t / (scene.motion.t[0] + scene.motion.t[1])
        assert np.linalg.norm(est.motion.t - gt) < 1e-6
        assert np.linalg.norm(est.motion.omega) < 1e-6


class TestPreselect:
    def _dense_corrs(self, scene, corrs):
        return corrs

    def test_center_band_excluded(self):
        scene, corrs, _ = make_scene("txy", seed=11, n_points=400, trans_frac=0.05,
                                     mode="exact")
        cfg = robust.PreselectConfig(center_half_width=0.1, per_bin=16, seed=0)
        idx = robust.preselect_correspondences(corrs, cfg)
        for i in idx:
            assert abs(corrs[i].first.v) >= 0.1

    def test_uniform_population(self):
        scene, corrs, _ = make_scene("txy", seed=12, n_points=600, trans_frac=0.05,
                                     mode="exact")
        cfg = robust.PreselectConfig(center_half_width=0.05, row_bins=3, disp_bins=3,
                                     per_bin=10, seed=1)
        idx = robust.preselect_correspondences(corrs, cfg)
        assert 9 * 2 <= len(idx) <= 9 * 10

    def test_large_displacement_stratum_retained(self):
        # plant a near "pole": a handful of large-displacement correspondences
        scene, corrs, _ = make_scene("txyz", seed=13, n_points=300, trans_frac=0.06,
                                     mode="exact", tdir=(1.0, 0.2, 0.0))
        pole, _, _ = make_scene("txyz", seed=14, n_points=12, trans_frac=0.06,
                                mode="exact", tdir=(1.0, 0.2, 0.0))
        from rsrig.synth import SceneConfig, generate_scene

        cfgp = SceneConfig(n_points=12, trans_frac_per_frame=0.06,
                           trans_direction=(1.0, 0.2, 0.0), depth_range=(1.2, 1.5))
        _, pole_corrs, _ = generate_scene(cfgp, 15)
        both = list(corrs) + list(pole_corrs)
        cfg = robust.PreselectConfig(center_half_width=0.05, per_bin=8,
                                     min_quota=4, seed=2)
        idx = robust.preselect_correspondences(both, cfg)
        assert sum(1 for i in idx if i >= len(corrs)) >= 2

    def test_empty_after_filtering(self):
        corrs = [Correspondence(ImagePoint(0.1, 0.0), ImagePoint(-0.1, 0.0))] * 5
        with pytest.raises(EmptyAfterFiltering):
            robust.preselect_correspondences(
                corrs, robust.PreselectConfig(center_half_width=0.05))


def test_monotone_best_score():
    """The accepted best never worsens across iterations (tracked via a probe)."""
    scene, corrs, _ = make_scene("rot", seed=16, n_points=50, omega_deg=10.0,
                                 sigma_px=0.5, outliers=0.2, mode="exact")
    scores = []
    orig = robust._msac_score

    def probe(res, thr):
        s = orig(res, thr)
        scores.append(s)
        return s

    robust._msac_score = probe
    try:
        robust.fit_global_v2(corrs, MotionModel.ROT, robust.RansacConfig(seed=9))
    finally:
        robust._msac_score = orig
    best = (-1, np.inf)
    # replay: the final best only improves
    for s in scores:
        if robust._better(s, best):
            best = s
    assert best[0] >= max(s[0] for s in scores) - 1e-9
