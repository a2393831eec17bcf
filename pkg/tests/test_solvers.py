import numpy as np
import pytest

from rsrig import solvers, synth
from rsrig.core import (
    Correspondence,
    ImagePoint,
    MotionEstimate,
    MotionModel,
    RigConfig,
    rotation_from_axis_angle,
)
from rsrig.errors import (
    CheiralityFailure,
    DegenerateRows,
    InconsistentRows,
    RankDeficient,
)
from tests.conftest import make_scene


def corr(u1, v1, u2, v2):
    return Correspondence(ImagePoint(u1, v1), ImagePoint(u2, v2))


class TestInstantPose:
    def test_zero_motion_no_baseline(self):
        pose = solvers.instant_pose(MotionEstimate.zero(), RigConfig(), 0.3, -0.2)
        assert np.allclose(pose.R, np.diag([-1.0, -1.0, 1.0]))
        assert np.allclose(pose.tvec, 0.0)

    def test_zero_motion_with_baseline(self):
        rig = RigConfig(baseline=[0.2, -0.1, 0.05])
        pose = solvers.instant_pose(MotionEstimate.zero(), rig, 0.1, 0.4)
        assert np.allclose(pose.tvec, rig.relative_rotation @ rig.baseline)

    def test_same_row_pure_rotation(self):
        motion = MotionEstimate(np.array([0.1, -0.2, 0.3]), np.zeros(3),
                                MotionModel.ROT, scale_known=True)
        pose = solvers.instant_pose(motion, RigConfig(), 0.25, 0.25)
        assert np.allclose(pose.R, np.diag([-1.0, -1.0, 1.0]), atol=1e-15)


class TestEpipolarResidual:
    def test_gt_on_linearized_data(self):
        scene, corrs, _ = make_scene("6dof", seed=0, omega_deg=20.0, trans_frac=0.06)
        for c in corrs:
            assert abs(solvers.epipolar_residual(c, scene.motion, scene.rig,
                                                 linearized=True)) < 1e-10

    def test_zero_motion_static_scene_degenerate_zero(self):
        scene, corrs, _ = make_scene("rot", seed=1, omega_deg=0.0, mode="exact")
        zero = MotionEstimate.zero()
        for c in corrs:
            assert solvers.epipolar_residual(c, zero, scene.rig) == 0.0

    def test_wrong_motion_nonzero(self, rng):
        scene, corrs, _ = make_scene("6dof", seed=2, n_points=20, omega_deg=10.0,
                                     trans_frac=0.05)
        hits = 0
        for _ in range(1000):
            wrong = MotionEstimate(rng.normal(size=3) * 0.2, rng.normal(size=3),
                                   MotionModel.SIXDOF, scale_known=True)
            r = solvers.epipolar_residual(corrs[0], wrong, scene.rig)
            hits += abs(r) > 1e-12
        assert hits == 1000


class TestSolveTx:
    def test_static(self):
        # static raw pair is (u', v') = (-u, -v)
        gs, ratio = solvers.solve_tx(corr(0.3, 0.2, -0.3, -0.2))
        assert (gs.u, gs.v) == (0.3, 0.2)
        assert ratio == 0.0

    def test_direct_substitution(self):
        # t_x/lambda = (u + u')/(2v) = 10; raw-frame GS u = (u - u')/2
        gs, ratio = solvers.solve_tx(corr(1.0, 0.2, 3.0, -0.2))
        assert ratio == pytest.approx(10.0)
        assert gs.u == pytest.approx(-1.0)
        assert gs.v == pytest.approx(0.2)

    def test_matches_projection_oracle(self):
        scene, corrs, _ = make_scene("tx", seed=3, n_points=10, trans_frac=0.05,
                                     mode="exact")
        for i, c in enumerate(corrs):
            gs, ratio = solvers.solve_tx(c)
            ref, _ = synth.project_gs(scene.points[i], scene.rig)
            assert np.hypot(gs.u - ref.u, gs.v - ref.v) < 1e-10
            depth = scene.points[i][2]
            assert ratio == pytest.approx(scene.motion.t[0] / depth, rel=1e-9)

    def test_inconsistent_rows(self):
        with pytest.raises(InconsistentRows):
            solvers.solve_tx(corr(0.1, 0.2, 0.2, -0.5))


class TestSolveTxy:
    def test_static_returns_first_point(self):
        gs, _ = solvers.solve_txy(corr(0.3, 0.2, -0.3, -0.2))
        assert np.hypot(gs.u - 0.3, gs.v - 0.2) < 1e-15

    def test_direct_substitution(self):
        # raw-frame closed form: u_g = -(u v' + u' v)/(v - v'), v_g = -2vv'/(v - v')
        gs, (rx, ry) = solvers.solve_txy(corr(0.5, 0.3, 0.1, 0.1))
        assert gs.u == pytest.approx(-0.4)
        assert gs.v == pytest.approx(-0.3)
        assert rx == pytest.approx((0.5 + 0.1) / 0.2)
        assert ry == pytest.approx((0.3 + 0.1) / 0.2)

    def test_matches_projection_oracle(self):
        scene, corrs, _ = make_scene("txy", seed=4, n_points=10, trans_frac=0.06,
                                     mode="exact", tdir=(0.6, 0.8, 0.0))
        for i, c in enumerate(corrs):
            gs, (rx, ry) = solvers.solve_txy(c)
            ref, _ = synth.project_gs(scene.points[i], scene.rig)
            assert np.hypot(gs.u - ref.u, gs.v - ref.v) < 1e-10
            depth = scene.points[i][2]
            assert rx == pytest.approx(scene.motion.t[0] / depth, rel=1e-8)
            assert ry == pytest.approx(scene.motion.t[1] / depth, rel=1e-8)

    def test_simultaneous_rows_degenerate(self):
        with pytest.raises(DegenerateRows):
            solvers.solve_txy(corr(0.1, 0.2, -0.1, 0.2))


class TestSolveTxyz:
    def test_static_gives_zero_translation(self):
        res = solvers.solve_txyz([corr(0.3, 0.2, -0.3, -0.2),
                                  corr(-0.1, 0.4, 0.1, -0.4)])
        assert np.linalg.norm(res.best.t) < 1e-12

    def test_direction_recovery(self):
        rng = np.random.default_rng(5)
        for seed in range(50):
            tdir = rng.normal(size=3)
            scene, corrs, _ = make_scene("txyz", seed=seed, trans_frac=0.06,
                                         tdir=tuple(tdir))
            res = solvers.solve_txyz(corrs)
            gt = scene.motion.t / np.linalg.norm(scene.motion.t)
            got = res.best.t / np.linalg.norm(res.best.t)
            assert min(np.linalg.norm(got - gt), np.linalg.norm(got + gt)) < 1e-8

    def test_pure_tz(self):
        scene, corrs, _ = make_scene("txyz", seed=6, trans_frac=0.08,
                                     tdir=(0.0, 0.0, 1.0))
        res = solvers.solve_txyz(corrs)
        assert np.allclose(res.best.t, [0.0, 0.0, 1.0], atol=1e-8)

    def test_coincident_rows_rank_deficient(self):
        with pytest.raises((RankDeficient, CheiralityFailure)):
            solvers.solve_txyz([corr(0.1, 0.2, -0.1, 0.2),
                                corr(0.3, 0.1, -0.3, 0.1)])


class TestSolveRotation:
    def test_static_pair_contains_zero(self):
        res = solvers.solve_rotation([corr(0.3, 0.2, -0.3, -0.2),
                                      corr(-0.2, 0.5, 0.2, -0.5)])
        assert any(np.linalg.norm(c.omega) < 1e-10 for c in res.candidates)

    def test_gt_recovery_linearized(self):
        rng = np.random.default_rng(7)
        for seed in range(50):
            scene, corrs, _ = make_scene("rot", seed=seed, omega_deg=15.0,
                                         axis=tuple(rng.normal(size=3)))
            res = solvers.solve_rotation(corrs)
            gt = scene.motion.omega
            assert any(np.linalg.norm(c.omega - gt) < 1e-6 * (1 + np.linalg.norm(gt))
                       for c in res.candidates)

    def test_candidate_bound(self):
        rng = np.random.default_rng(8)
        for seed in range(100):
            scene, corrs, _ = make_scene("rot", seed=seed,
                                         omega_deg=rng.uniform(1, 30),
                                         axis=tuple(rng.normal(size=3)))
            assert len(solvers.solve_rotation(corrs).candidates) <= 8


class TestSolve6dof:
    def test_static_five_tuple(self):
        pts = [(0.3, 0.2), (-0.1, 0.4), (0.25, -0.3), (-0.35, -0.15), (0.05, 0.45)]
        corrs = [corr(u, v, -u, -v) for u, v in pts]
        res = solvers.solve_6dof(corrs)
        best = res.candidates[0]
        assert np.linalg.norm(best.omega) < 1e-8
        for c in corrs:
            assert abs(solvers.epipolar_residual(c, best, RigConfig(),
                                                 linearized=True)) < 1e-12

    def test_gt_recovery(self):
        rng = np.random.default_rng(9)
        for seed in range(50):
            scene, corrs, _ = make_scene(
                "6dof", seed=seed, omega_deg=rng.uniform(1, 30),
                trans_frac=rng.uniform(0.01, 0.1),
                axis=tuple(rng.normal(size=3)), tdir=tuple(rng.normal(size=3)))
            res = solvers.solve_6dof(corrs)
            gt_w = scene.motion.omega
            gt_t = scene.motion.t / (scene.motion.t[0] + scene.motion.t[1])
            assert any(
                np.linalg.norm(c.omega - gt_w) < 1e-6 * (1 + np.linalg.norm(gt_w))
                and np.linalg.norm(c.t - gt_t) < 1e-6 * (1 + np.linalg.norm(gt_t))
                for c in res.candidates)

    def test_gauge_holds(self):
        scene, corrs, _ = make_scene("6dof", seed=10, omega_deg=12.0, trans_frac=0.05)
        for c in solvers.solve_6dof(corrs).candidates:
            assert c.t[0] + c.t[1] == pytest.approx(1.0, abs=1e-12)

    def test_gauge_invariance_of_residual(self):
        scene, corrs, _ = make_scene("6dof", seed=11, omega_deg=10.0, trans_frac=0.04)
        best = solvers.solve_6dof(corrs).candidates[0]
        for s in (0.5, 2.0, -3.0):
            scaled = MotionEstimate(best.omega, best.t * s, MotionModel.SIXDOF,
                                    scale_known=True)
            for c in corrs[:2]:
                r0 = solvers.epipolar_residual(c, best, scene.rig, linearized=True)
                r1 = solvers.epipolar_residual(c, scaled, scene.rig, linearized=True)
                assert r1 == pytest.approx(s * r0, rel=1e-9, abs=1e-15)


class TestSolve6dofBaseline:
    def test_metric_recovery(self):
        scene, corrs, _ = make_scene("6dof-baseline", seed=12, omega_deg=15.0,
                                     trans_frac=0.05, baseline_ratio=0.05)
        res = solvers.solve_6dof_baseline(corrs, scene.rig)
        gt_w, gt_t = scene.motion.omega, scene.motion.t
        assert any(
            np.linalg.norm(c.omega - gt_w) < 1e-6 * (1 + np.linalg.norm(gt_w))
            and np.linalg.norm(c.t - gt_t) < 1e-6 * (1 + np.linalg.norm(gt_t))
            for c in res.candidates)
        assert all(c.scale_known for c in res.candidates)

    def test_zero_baseline_matches_five_point(self):
        scene, corrs, _ = make_scene("6dof", seed=13, omega_deg=8.0, trans_frac=0.05,
                                     n_points=6)
        rig0 = RigConfig(baseline=[1e-13, 0.0, 0.0])
        res_b = solvers.solve_6dof_baseline(corrs, rig0)
        res_5 = solvers.solve_6dof(solvers.corr_matrix(corrs)[:5])
        best_b, best_5 = res_b.candidates[0], res_5.candidates[0]
        assert np.allclose(best_b.omega, best_5.omega, atol=1e-9)
        assert np.allclose(best_b.t, best_5.t, atol=1e-9)
        assert not best_b.scale_known

    def test_near_zero_baseline_continuity(self):
        # tiny baseline: up-to-scale direction approaches the 5-point answer
        scene, corrs, _ = make_scene("6dof-baseline", seed=14, omega_deg=3.0,
                                     trans_frac=0.05, baseline_ratio=1e-9)
        res = solvers.solve_6dof_baseline(corrs, scene.rig)
        gt_dir = scene.motion.t / np.linalg.norm(scene.motion.t)
        got = min(
            res.candidates,
            key=lambda c: np.linalg.norm(c.omega - scene.motion.omega),
        )
        got_dir = got.t / np.linalg.norm(got.t)
        assert np.linalg.norm(got.omega - scene.motion.omega) < 1e-5
        assert min(np.linalg.norm(got_dir - gt_dir),
                   np.linalg.norm(got_dir + gt_dir)) < 1e-4

    def test_candidate_bound(self):
        rng = np.random.default_rng(15)
        for seed in range(50):
            scene, corrs, _ = make_scene(
                "6dof-baseline", seed=seed, omega_deg=rng.uniform(1, 25),
                trans_frac=rng.uniform(0.01, 0.1), baseline_ratio=0.05,
                axis=tuple(rng.normal(size=3)), tdir=tuple(rng.normal(size=3)))
            res = solvers.solve_6dof_baseline(corrs, scene.rig)
            assert len(res.candidates) <= 20


def test_candidates_sorted_by_residual():
    scene, corrs, _ = make_scene("6dof", seed=16, omega_deg=20.0, trans_frac=0.06)
    res = solvers.solve_6dof(corrs)
    assert list(res.residuals) == sorted(res.residuals)


def test_candidate_soundness_on_own_minimal_set():
    """Every candidate satisfies its own minimal constraints to 1e-6."""
    rng = np.random.default_rng(17)
    for seed in range(30):
        scene, corrs, _ = make_scene(
            "6dof", seed=seed, omega_deg=rng.uniform(1, 30),
            trans_frac=rng.uniform(0.01, 0.1),
            axis=tuple(rng.normal(size=3)), tdir=tuple(rng.normal(size=3)))
        try:
            res = solvers.solve_6dof(corrs)
        except Exception:
            continue
        for cand in res.candidates:
            for c in corrs:
                r = solvers.epipolar_residual(c, cand, scene.rig, linearized=True)
                assert abs(r) <= 1e-6 * (1.0 + np.linalg.norm(cand.t))
        scene_r, corrs_r, _ = make_scene("rot", seed=seed,
                                         omega_deg=rng.uniform(1, 30),
                                         axis=tuple(rng.normal(size=3)))
        rows = solvers._rotation_equation_rows(solvers.corr_matrix(corrs_r),
                                               scene_r.rig)
        from rsrig import polysolve

        for cand in solvers.solve_rotation(corrs_r).candidates:
            vals = polysolve.monomial_values(polysolve.MONO10, cand.omega)
            assert np.max(np.abs(rows @ vals)) <= 1e-6 * np.max(np.abs(rows))
