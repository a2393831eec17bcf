"""Compare the compiled polynomial kernels against the pure-numpy twins.

Run:  python benchmarks/bench_kernels.py [--trials N]
"""

import argparse
import time

import numpy as np

from rsrig import polysolve, solvers, synth
from rsrig._kernels import _kernels_py as kpy

try:
    from rsrig._kernels import _kernels_cy as kcy
except ImportError:
    kcy = None


def _time(fn, args, trials):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(trials):
        fn(*args)
    return (time.perf_counter() - t0) / trials * 1e6


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=500)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    p = rng.normal(size=3)
    vals = polysolve.monomial_values(polysolve.MONO10, p)
    Q = rng.normal(size=(3, 10))
    Q -= np.outer((Q @ vals) / (vals @ vals), vals)
    Q = np.ascontiguousarray(Q[:, polysolve._HIDE_COLS[0]])

    scene, corrs, _ = synth.generate_scene(
        synth.SceneConfig(n_points=5, omega_deg_per_frame=15,
                          trans_frac_per_frame=0.04, mode="linearized"), 3)
    arr = solvers.corr_matrix(corrs)
    C = polysolve.hidden_variable_eliminate(
        solvers.sixdof_coefficient_matrix(arr, scene.rig)).coeffs
    C = np.ascontiguousarray(C / np.max(np.abs(C)))

    sceneb, corrsb, _ = synth.generate_scene(
        synth.SceneConfig(n_points=6, omega_deg_per_frame=15, trans_frac_per_frame=0.04,
                          baseline_ratio=0.05, mode="linearized"), 4)
    arrb = solvers.corr_matrix(corrsb)
    Cb = polysolve.baseline_minors(
        solvers.baseline_coefficient_matrix(arrb, sceneb.rig)).coeffs
    Cb = np.ascontiguousarray(Cb / np.max(np.abs(Cb)))

    cases = [
        ("e3q3_roots (3x10)", "e3q3_roots", (Q,)),
        ("cubic_action_roots (10x20)", "cubic_action_roots", (C,)),
        ("quartic_action_roots (15x35)", "quartic_action_roots", (Cb,)),
    ]
    print(f"{'kernel':32s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, name, fargs in cases:
        tp = _time(getattr(kpy, name), fargs, args.trials)
        if kcy is None:
            print(f"{label:32s} {tp:8.1f}us  (compiled kernels unavailable)")
            continue
        tc = _time(getattr(kcy, name), fargs, args.trials)
        print(f"{label:32s} {tp:8.1f}us {tc:8.1f}us {tp / tc:7.1f}x")

    # end-to-end solver comparison through the dispatch layer
    import importlib
    import os

    for backend_env in ("1", ""):
        os.environ["RSRIG_PURE_PYTHON"] = backend_env
        import rsrig._kernels as kk

        importlib.reload(kk)
        importlib.reload(polysolve)
        import rsrig.solvers as sv

        importlib.reload(sv)
        scene2, corrs2, _ = synth.generate_scene(
            synth.SceneConfig(n_points=2, omega_deg_per_frame=15, mode="linearized"), 0)
        arr2 = sv.corr_matrix(corrs2)
        t = _time(lambda a: sv.solve_rotation(a), (arr2,), max(args.trials // 2, 50))
        print(f"solve_rotation [{kk.KERNEL_BACKEND:8s}] {t:8.1f}us")
        t = _time(lambda a: sv.solve_6dof(a), (arr,), max(args.trials // 2, 50))
        print(f"solve_6dof     [{kk.KERNEL_BACKEND:8s}] {t:8.1f}us")


if __name__ == "__main__":
    main()
