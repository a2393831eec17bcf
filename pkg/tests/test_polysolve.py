import numpy as np
import pytest

from rsrig import polysolve as ps
from rsrig import solvers, synth
from rsrig.errors import DegenerateSystem, ShapeMismatch
from tests.conftest import make_scene


def plant_quadrics(rng, roots):
    """Random quadrics vanishing on the given roots."""
    V = np.stack([ps.monomial_values(ps.MONO10, r) for r in roots])
    Q = rng.normal(size=(3, 10))
    # project each row onto the null space of the evaluation constraints
    U, s, Vh = np.linalg.svd(V)
    basis = Vh[len(roots):]
    return (Q @ basis.T) @ basis


def residual_rel(C, mons, root):
    vals = ps.monomial_values(mons, root)
    return np.max(np.abs(C @ vals)) / (np.max(np.abs(C)) * max(1.0, np.max(np.abs(vals))))


class TestSolve3q3:
    def test_factorable_system(self):
        # x^2 = 1, xy = 1, xz = 1 -> (1,1,1) and (-1,-1,-1)
        Q = np.zeros((3, 10))
        Q[0, 0], Q[0, 9] = 1.0, -1.0
        Q[1, 1], Q[1, 9] = 1.0, -1.0
        Q[2, 2], Q[2, 9] = 1.0, -1.0
        roots = sorted(tuple(np.round(r, 9)) for r in ps.solve_3q3(Q))
        assert roots == [(-1.0, -1.0, -1.0), (1.0, 1.0, 1.0)]

    def test_planted_roots_recovered(self, rng):
        # completeness on planted instances: 100% at noise 0
        for trial in range(1000):
            planted = [rng.normal(size=3) for _ in range(4)]
            Q = plant_quadrics(rng, planted)
            roots = ps.solve_3q3(Q)
            for p in planted:
                assert any(np.linalg.norm(r - p) < 1e-7 * (1 + np.linalg.norm(p))
                           for r in roots)

    def test_rotation_instance_contains_gt(self):
        import scipy.linalg

        scene, corrs, _ = make_scene("rot", seed=3, omega_deg=20.0)
        rows = solvers._rotation_equation_rows(solvers.corr_matrix(corrs), scene.rig)
        # rows from a single correspondence are rank deficient; pick the three
        # most independent ones the way the solver does
        _, _, piv = scipy.linalg.qr(rows[:, 6:10].T, pivoting=True, mode="economic")
        picked = rows[sorted(piv[:3])]
        roots = ps.solve_3q3(picked)
        gt = scene.motion.omega
        assert any(np.linalg.norm(r - gt) < 1e-8 * (1 + np.linalg.norm(gt))
                   for r in roots)
        for r in roots:
            assert residual_rel(picked, ps.MONO10, r) <= 1e-8

    def test_root_count_bounded_by_bezout(self, rng):
        for _ in range(100):
            assert len(ps.solve_3q3(rng.normal(size=(3, 10)))) <= 8

    def test_scale_invariance(self, rng):
        Q = rng.normal(size=(3, 10))
        r1 = sorted(tuple(r) for r in ps.solve_3q3(Q))
        r2 = sorted(tuple(r) for r in ps.solve_3q3(1737.5 * Q))
        assert len(r1) == len(r2)
        for a, b in zip(r1, r2):
            assert np.linalg.norm(np.array(a) - b) < 1e-10 * (1 + np.linalg.norm(a))

    def test_shape_check(self):
        with pytest.raises(ShapeMismatch):
            ps.solve_3q3(np.zeros((4, 10)))


class TestHiddenVariableEliminate:
    def test_constant_rank2_matrix_gives_zero_cubics(self, rng):
        M = np.zeros((5, 3, 4))
        base = rng.normal(size=(2, 3))
        coeffs = rng.normal(size=(5, 2))
        M[:, :, 3] = coeffs @ base  # constant entries, rank 2
        system = ps.hidden_variable_eliminate(M)
        assert np.max(np.abs(system.coeffs)) < 1e-12

    def test_monomial_support_is_cubic_basis(self):
        assert len(ps.MONO20) == 20
        assert all(sum(m) <= 3 for m in ps.MONO20)
        scene, corrs, _ = make_scene("6dof", seed=1)
        M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
        system = ps.hidden_variable_eliminate(M)
        assert system.coeffs.shape == (10, 20)
        assert system.monomials == ps.MONO20

    def test_gt_is_common_root(self):
        scene, corrs, _ = make_scene("6dof", seed=2, omega_deg=22.0, trans_frac=0.06)
        M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
        system = ps.hidden_variable_eliminate(M)
        assert residual_rel(system.coeffs, ps.MONO20, scene.motion.omega) < 1e-8

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ps.hidden_variable_eliminate(np.zeros((4, 3, 4)))


class TestSolveCubicSystem:
    def test_gt_recovery(self):
        scene, corrs, _ = make_scene("6dof", seed=4, omega_deg=18.0, trans_frac=0.05)
        M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
        roots = ps.solve_cubic_system(ps.hidden_variable_eliminate(M))
        gt = scene.motion.omega
        assert any(np.linalg.norm(r - gt) < 1e-6 * (1 + np.linalg.norm(gt))
                   for r in roots)

    def test_at_most_ten_real_roots(self):
        rng = np.random.default_rng(11)
        for seed in range(200):
            scene, corrs, _ = make_scene(
                "6dof", seed=seed, omega_deg=rng.uniform(1, 30),
                trans_frac=rng.uniform(0.01, 0.1),
                axis=tuple(rng.normal(size=3)), tdir=tuple(rng.normal(size=3)))
            M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
            roots = ps.solve_cubic_system(ps.hidden_variable_eliminate(M))
            assert len(roots) <= 10

    def test_planted_single_root(self, rng):
        for _ in range(50):
            p = rng.normal(size=3)
            vals = ps.monomial_values(ps.MONO20, p)
            C = rng.normal(size=(10, 20))
            C -= np.outer((C @ vals) / (vals @ vals), vals)
            roots = ps.solve_cubic_system(C)
            assert any(np.linalg.norm(r - p) < 1e-6 * (1 + np.linalg.norm(p))
                       for r in roots)

    def test_returned_roots_satisfy_residual(self, rng):
        scene, corrs, _ = make_scene("6dof", seed=5, omega_deg=12.0, trans_frac=0.03)
        M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
        system = ps.hidden_variable_eliminate(M)
        for r in ps.solve_cubic_system(system):
            assert residual_rel(system.coeffs, ps.MONO20, r) <= 1e-6

    def test_degenerate_zero_system(self):
        with pytest.raises(DegenerateSystem):
            ps.solve_cubic_system(np.zeros((10, 20)))


class TestSolveBaselineSystem:
    def test_gt_recovery_base_to_depth_20(self):
        scene, corrs, _ = make_scene("6dof-baseline", seed=6, omega_deg=15.0,
                                     trans_frac=0.05, baseline_ratio=0.05)
        M = solvers.baseline_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
        sols = ps.solve_baseline_system(M)
        gt_w, gt_t = scene.motion.omega, scene.motion.t
        assert any(
            np.linalg.norm(w - gt_w) < 1e-6 * (1 + np.linalg.norm(gt_w))
            and np.linalg.norm(t - gt_t) < 1e-6 * (1 + np.linalg.norm(gt_t))
            for w, t in sols
        )

    def test_at_most_twenty_solutions(self):
        rng = np.random.default_rng(12)
        for seed in range(150):
            scene, corrs, _ = make_scene(
                "6dof-baseline", seed=1000 + seed, omega_deg=rng.uniform(1, 25),
                trans_frac=rng.uniform(0.01, 0.1), baseline_ratio=0.05,
                axis=tuple(rng.normal(size=3)), tdir=tuple(rng.normal(size=3)))
            M = solvers.baseline_coefficient_matrix(
                solvers.corr_matrix(corrs), scene.rig)
            assert len(ps.solve_baseline_system(M)) <= 20

    def test_zero_baseline_rejected(self):
        scene, corrs, _ = make_scene("6dof", seed=7)
        arr = solvers.corr_matrix(corrs)
        arr = np.vstack([arr, arr[0]])
        M = solvers.baseline_coefficient_matrix(arr, scene.rig)  # b = 0
        with pytest.raises(DegenerateSystem):
            ps.solve_baseline_system(M)


def test_backends_agree():
    from rsrig._kernels import _kernels_py as kpy

    try:
        from rsrig._kernels import _kernels_cy as kcy
    except ImportError:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(13)

    def canon(rs):
        return sorted(tuple(np.round(r, 7)) for r in rs)

    for trial in range(50):
        p = rng.normal(size=3)
        vals = ps.monomial_values(ps.MONO10, p)
        Q = rng.normal(size=(3, 10))
        Q -= np.outer((Q @ vals) / (vals @ vals), vals)
        Qh = np.ascontiguousarray(Q[:, ps._HIDE_COLS[0]])
        assert canon(kpy.e3q3_roots(Qh)) == canon(kcy.e3q3_roots(Qh))

    scene, corrs, _ = make_scene("6dof", seed=8, omega_deg=14.0, trans_frac=0.04)
    M = solvers.sixdof_coefficient_matrix(solvers.corr_matrix(corrs), scene.rig)
    C = ps.hidden_variable_eliminate(M).coeffs
    C = np.ascontiguousarray(C / np.max(np.abs(C)))
    rp, cp = kpy.cubic_action_roots(C)
    rc, cc = kcy.cubic_action_roots(C)
    assert canon(rp) == canon(rc)
    assert cp == pytest.approx(cc, rel=1e-6)
