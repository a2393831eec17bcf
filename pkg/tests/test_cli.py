import subprocess
import sys

import numpy as np
import pytest

from rsrig import cli
from rsrig import io as rio


def run_cli(args):
    return cli.main(args)


class TestSynthCommand:
    def test_deterministic_outputs(self, tmp_path):
        argv = ["synth", "--motion", "rot", "--omega-deg", "15", "--sigma-px", "0.5",
                "--seed", "7", "--out-corrs", str(tmp_path / "a.csv"),
                "--out-motion", str(tmp_path / "a.txt")]
        assert run_cli(argv) == 0
        argv2 = ["synth", "--motion", "rot", "--omega-deg", "15", "--sigma-px", "0.5",
                 "--seed", "7", "--out-corrs", str(tmp_path / "b.csv"),
                 "--out-motion", str(tmp_path / "b.txt")]
        assert run_cli(argv2) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_static_flip_convention(self, tmp_path):
        argv = ["synth", "--motion", "rot", "--omega-deg", "0", "--sigma-px", "0",
                "--seed", "1", "--out-corrs", str(tmp_path / "c.csv"),
                "--out-motion", str(tmp_path / "m.txt")]
        assert run_cli(argv) == 0
        for c in rio.read_correspondences(tmp_path / "c.csv"):
            assert c.second.u == pytest.approx(-c.first.u, abs=1e-12)
            assert c.second.v == pytest.approx(-c.first.v, abs=1e-12)

    def test_bad_flag_exits_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "rsrig", "synth", "--badflag"],
            capture_output=True, text=True)
        assert proc.returncode == 2
        assert "usage" in proc.stderr.lower()


class TestSolveCommand:
    @pytest.fixture
    def corrs_file(self, tmp_path):
        path = tmp_path / "c.csv"
        run_cli(["synth", "--motion", "6dof", "--omega-deg", "12",
                 "--trans-frac", "0.04", "--sigma-px", "0.5", "--outliers", "0.2",
                 "--n-points", "80", "--seed", "3",
                 "--out-corrs", str(path), "--out-motion", str(tmp_path / "gt.txt")])
        return path, tmp_path / "gt.txt"

    def test_solve_recovers_gt(self, corrs_file, tmp_path):
        path, gt_path = corrs_file
        out = tmp_path / "est.txt"
        rc = run_cli(["solve", "--corrs", str(path), "--solver", "6dof",
                      "--variant", "v2", "--seed", "1", "--out", str(out),
                      "--out-inliers", str(tmp_path / "inl.txt")])
        assert rc == 0
        est = rio.read_motion(out)
        gt = rio.read_motion(gt_path)
        gt_t = gt.t / (gt.t[0] + gt.t[1])
        assert np.linalg.norm(est.omega - gt.omega) < 2e-2
        assert np.linalg.norm(est.t - gt_t) < 0.8
        mask = (tmp_path / "inl.txt").read_text().splitlines()
        assert len(mask) == 80

    def test_missing_file_exits_1(self, tmp_path):
        rc = run_cli(["solve", "--corrs", str(tmp_path / "nope.csv"),
                      "--solver", "rot", "--out", str(tmp_path / "o.txt")])
        assert rc == 1

    def test_deterministic(self, corrs_file, tmp_path):
        path, _ = corrs_file
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        run_cli(["solve", "--corrs", str(path), "--solver", "rot", "--seed", "9",
                 "--out", str(a)])
        run_cli(["solve", "--corrs", str(path), "--solver", "rot", "--seed", "9",
                 "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestRectifyCommand:
    def test_rotation_mode(self, tmp_path):
        run_cli(["synth", "--motion", "rot", "--omega-deg", "10", "--seed", "2",
                 "--out-corrs", str(tmp_path / "c.csv"),
                 "--out-motion", str(tmp_path / "m.txt"),
                 "--render-prefix", str(tmp_path / "r_")])
        rc = run_cli(["rectify", "--mode", "rotation", "--motion", str(tmp_path / "m.txt"),
                      "--image1", str(tmp_path / "r_1.pgm"),
                      "--image2", str(tmp_path / "r_2.pgm"),
                      "--out-prefix", str(tmp_path / "out_")])
        assert rc == 0
        assert (tmp_path / "out_fused.pgm").exists()
        assert (tmp_path / "out_warp1_valid.pgm").exists()

    def test_translation_mode_needs_flow(self, tmp_path):
        run_cli(["synth", "--motion", "txy", "--trans-frac", "0.04", "--seed", "2",
                 "--out-corrs", str(tmp_path / "c.csv"),
                 "--out-motion", str(tmp_path / "m.txt"),
                 "--render-prefix", str(tmp_path / "r_")])
        rc = run_cli(["rectify", "--mode", "translation",
                      "--motion", str(tmp_path / "m.txt"),
                      "--image1", str(tmp_path / "r_1.pgm"),
                      "--image2", str(tmp_path / "r_2.pgm"),
                      "--out-prefix", str(tmp_path / "out_")])
        assert rc == 1  # missing flow files

    def test_translation_mode_full(self, tmp_path):
        run_cli(["synth", "--motion", "6dof", "--trans-frac", "0.05",
                 "--omega-deg", "0", "--seed", "2",
                 "--out-corrs", str(tmp_path / "c.csv"),
                 "--out-motion", str(tmp_path / "m.txt"),
                 "--render-prefix", str(tmp_path / "r_")])
        rc = run_cli(["rectify", "--mode", "translation",
                      "--motion", str(tmp_path / "m.txt"),
                      "--image1", str(tmp_path / "r_1.pgm"),
                      "--image2", str(tmp_path / "r_2.pgm"),
                      "--flow12", str(tmp_path / "r_12.flo"),
                      "--flow21", str(tmp_path / "r_21.flo"),
                      "--out-prefix", str(tmp_path / "out_")])
        assert rc == 0
        for suffix in ("render", "depth1", "depth2", "depthfused", "mask1",
                       "mask2", "flags"):
            assert (tmp_path / f"out_{suffix}.pgm").exists()


class TestBenchmarkCommand:
    def test_tiny_benchmark_deterministic(self, tmp_path):
        args = ["benchmark", "--sweep", "velocity", "--scenes", "2",
                "--n-points", "40", "--omega-steps", "2", "--iters", "30",
                "--seed", "5", "--out", str(tmp_path / "a.csv")]
        assert run_cli(args) == 0
        args[-1] = str(tmp_path / "b.csv")
        assert run_cli(args) == 0
        a = (tmp_path / "a.csv").read_text()
        b = (tmp_path / "b.csv").read_text()
        # runtime column varies; compare everything else
        def strip_runtime(text):
            return ["," .join(line.split(",")[:-1]) for line in text.splitlines()]
        assert strip_runtime(a)[1:] == strip_runtime(b)[1:]
        records, meta = rio.read_benchmark_csv(tmp_path / "a.csv")
        assert meta["iters"] == "30"
        solvers_seen = {r.solver for r in records}
        assert {"interp", "txy", "txyz", "rot", "6dof"} <= solvers_seen
