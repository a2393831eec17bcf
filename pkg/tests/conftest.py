import numpy as np
import pytest

from rsrig import synth


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_scene(model="6dof", seed=0, n=None, omega_deg=15.0, trans_frac=0.04,
               sigma_px=0.0, mode="linearized", baseline_ratio=0.0, axis=(0.3, 1.0, 0.5),
               tdir=(1.0, 0.5, 0.3), outliers=0.0, n_points=None):
    from rsrig.core import MotionModel
    from rsrig.solvers import MINIMAL_SET_SIZE

    tag = {"tx": MotionModel.TX, "txy": MotionModel.TXY, "txyz": MotionModel.TXYZ,
           "rot": MotionModel.ROT, "6dof": MotionModel.SIXDOF,
           "6dof-baseline": MotionModel.SIXDOF_BASELINE}[model]
    if n_points is None:
        n_points = n if n is not None else MINIMAL_SET_SIZE[tag]
    if model == "rot":
        trans_frac = 0.0
    if model in ("tx",):
        omega_deg, tdir = 0.0, (1.0, 0.0, 0.0)
    if model == "txy":
        omega_deg, tdir = 0.0, (tdir[0], tdir[1], 0.0)
    if model == "txyz":
        omega_deg = 0.0
    cfg = synth.SceneConfig(
        n_points=n_points, omega_deg_per_frame=omega_deg, omega_axis=axis,
        trans_frac_per_frame=trans_frac, trans_direction=tdir, sigma_px=sigma_px,
        outlier_fraction=outliers, baseline_ratio=baseline_ratio, mode=mode,
    )
    return synth.generate_scene(cfg, seed)
