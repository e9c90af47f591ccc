import subprocess
import sys

import numpy as np
import pytest

from holosim import ComplexField, read_field, read_report, write_field
from conftest import make_point_scene, write_pgm8

LAM = 5.32e-7


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "holosim", *args],
        capture_output=True,
        text=True,
        timeout=600,
    )


class TestMvsDesign:
    def test_reference_design(self, tmp_path):
        result = run_cli(
            "mvs-design",
            "--focal", "5e-3",
            "--znear", "0.1",
            "--zfar", "5.0",
            "--screen", "1.0x1.0",
            "--watch", "1.0",
            "--out", str(tmp_path),
        )
        assert result.returncode == 0, result.stderr
        values = dict(
            line.split(" = ", 1) for line in result.stdout.strip().splitlines()
        )
        assert float(values["scan_range_m"]) == pytest.approx(2.5815288973183713e-4, rel=1e-9)
        assert values["scan_feasible"] == "PASS"
        assert float(values["magnification_near"]) == pytest.approx(-19.0, rel=1e-9)
        assert float(values["magnification_far"]) == pytest.approx(-999.0, rel=1e-9)
        assert float(values["solid_angle_sr"]) == pytest.approx(0.8054316831613231, rel=1e-9)
        assert float(values["solid_angle_small_angle_sr"]) == 1.0
        assert (tmp_path / "design.csv").exists()

    def test_zero_interval(self, tmp_path):
        result = run_cli(
            "mvs-design", "--focal", "5e-3", "--znear", "0.1", "--zfar", "0.1",
            "--screen", "1x1", "--watch", "1",
        )
        assert result.returncode == 0
        assert "scan_range_m = 0.0" in result.stdout

    def test_depth_inside_focus_fails(self):
        result = run_cli(
            "mvs-design", "--focal", "5e-3", "--znear", "4e-3", "--zfar", "1.0",
            "--screen", "1x1", "--watch", "1",
        )
        assert result.returncode == 1
        assert "focal length" in result.stderr

    def test_bad_screen_format(self):
        result = run_cli(
            "mvs-design", "--focal", "5e-3", "--znear", "0.1", "--zfar", "1.0",
            "--screen", "1m2", "--watch", "1",
        )
        assert result.returncode == 2


class TestPropagate:
    def _dump_field(self, path, n=64):
        rng = np.random.default_rng(0)
        spec = np.zeros((n, n), complex)
        # keep the spectrum inside the anti-aliasing limit of every leg used
        spec[:4, :4] = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        f = ComplexField(np.fft.ifft2(spec), pitch=8e-6, wavelength=LAM)
        write_field(f, path)
        return f

    def test_identity_distance(self, tmp_path):
        f = self._dump_field(tmp_path / "in.field")
        result = run_cli(
            "propagate", "--in", str(tmp_path / "in.field"), "--dz", "0.0",
            "--method", "as", "--out", str(tmp_path / "out"),
        )
        assert result.returncode == 0, result.stderr
        g = read_field(tmp_path / "out" / "propagated.field")
        rel = np.linalg.norm(g.samples - f.samples) / np.linalg.norm(f.samples)
        assert rel < 1e-12

    def test_round_trip_two_invocations(self, tmp_path):
        f = self._dump_field(tmp_path / "in.field")
        fwd = tmp_path / "fwd"
        back = tmp_path / "back"
        r1 = run_cli(
            "propagate", "--in", str(tmp_path / "in.field"), "--dz", "0.05",
            "--method", "as", "--out", str(fwd), "--pad-factor", "1",
        )
        assert r1.returncode == 0, r1.stderr
        r2 = run_cli(
            "propagate", "--in", str(fwd / "propagated.field"), "--dz", "-0.05",
            "--method", "as", "--out", str(back), "--pad-factor", "1",
        )
        assert r2.returncode == 0, r2.stderr
        g = read_field(back / "propagated.field")
        rel = np.linalg.norm(g.samples - f.samples) / np.linalg.norm(f.samples)
        assert rel < 1e-8

    def test_fresnel_pitch_change(self, tmp_path):
        self._dump_field(tmp_path / "in.field")
        result = run_cli(
            "propagate", "--in", str(tmp_path / "in.field"), "--dz", "0.5",
            "--method", "fresnel", "--out", str(tmp_path / "out"),
        )
        assert result.returncode == 0, result.stderr
        g = read_field(tmp_path / "out" / "propagated.field")
        assert g.pitch == pytest.approx(LAM * 0.5 / (64 * 8e-6), rel=1e-12)

    def test_fresnel_zero_distance_usage_error(self, tmp_path):
        self._dump_field(tmp_path / "in.field")
        result = run_cli(
            "propagate", "--in", str(tmp_path / "in.field"), "--dz", "0",
            "--method", "fresnel", "--out", str(tmp_path / "out"),
        )
        assert result.returncode == 2

    def test_missing_input_file(self, tmp_path):
        result = run_cli(
            "propagate", "--in", str(tmp_path / "nope.field"), "--dz", "0.1",
            "--method", "as", "--out", str(tmp_path / "out"),
        )
        assert result.returncode == 1


class TestSimulate:
    def test_tiny_point_scene(self, tmp_path):
        scene = make_point_scene(tmp_path, nx=128)
        out = tmp_path / "out"
        result = run_cli(
            "simulate", "--scene", str(scene), "--out", str(out),
            "--seed", "5", "--steps", "11", "--dump-fields",
        )
        assert result.returncode == 0, result.stderr
        for name in (
            "interferogram.pgm",
            "mask.pgm",
            "reconstruction.pgm",
            "term_zero_order.pgm",
            "term_real_image.pgm",
            "term_virtual_image.pgm",
            "report.csv",
            "object.field",
            "reconstruction.field",
        ):
            assert (out / name).exists(), name
        report, extras = read_report(out / "report.csv")
        assert report.focus_depth == pytest.approx(0.05, abs=0.01)
        assert extras["seed"] == "5"
        assert not (out / "FAILED").exists()

    def test_invalid_scene_exit_one(self, tmp_path):
        write_pgm8(tmp_path / "img.pgm", np.ones((4, 4)))
        bad = tmp_path / "bad.scene"
        bad.write_text(
            "[slice]\nimage = img.pgm\ndepth = -0.1\nextent = 1e-4\n"
            "[slice]\nimage = img.pgm\ndepth = -0.2\nextent = 1e-4\n"
        )
        result = run_cli("simulate", "--scene", str(bad), "--out", str(tmp_path / "o"))
        assert result.returncode == 1
        assert "depths monotonic" in result.stderr

    def test_missing_scene_exit_one(self, tmp_path):
        result = run_cli(
            "simulate", "--scene", str(tmp_path / "none.scene"), "--out", str(tmp_path / "o")
        )
        assert result.returncode == 1

    def test_bad_steps_usage_error(self, tmp_path):
        scene = make_point_scene(tmp_path)
        result = run_cli(
            "simulate", "--scene", str(scene), "--out", str(tmp_path / "o"), "--steps", "1"
        )
        assert result.returncode == 2

    def test_chromatic_run_writes_previews(self, tmp_path):
        scene = make_point_scene(tmp_path, nx=64, pitch=8e-6, depth=-0.02)
        out = tmp_path / "out"
        result = run_cli(
            "simulate", "--scene", str(scene), "--out", str(out),
            "--wavelengths", "6.33e-7,5.32e-7,4.88e-7", "--steps", "5",
        )
        assert result.returncode == 0, result.stderr
        assert (out / "report_w0_633nm.csv").exists()
        assert (out / "report_w1_532nm.csv").exists()
        assert (out / "report_w2_488nm.csv").exists()
        for channel in ("r", "g", "b"):
            assert (out / f"preview_{channel}.pgm").exists()

    def test_determinism_across_threads_and_runs(self, tmp_path):
        scene = make_point_scene(tmp_path, nx=128, diffuse=True)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        r1 = run_cli(
            "simulate", "--scene", str(scene), "--out", str(out1),
            "--seed", "11", "--steps", "9", "--threads", "1", "--dump-fields",
        )
        r2 = run_cli(
            "simulate", "--scene", str(scene), "--out", str(out2),
            "--seed", "11", "--steps", "9", "--threads", "3", "--dump-fields",
        )
        assert r1.returncode == 0 and r2.returncode == 0
        for name in ("report.csv", "object.field", "reconstruction.field", "mask.pgm"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestSweep:
    def test_single_slice_single_maximum(self, tmp_path):
        scene = make_point_scene(tmp_path, nx=128, depth=-0.05)
        out = tmp_path / "out"
        result = run_cli(
            "sweep", "--scene", str(scene), "--zmin", "0.025", "--zmax", "0.075",
            "--steps", "11", "--out", str(out),
        )
        assert result.returncode == 0, result.stderr
        lines = (out / "curve.csv").read_text().strip().splitlines()
        assert lines[0] == "z,peak"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        assert len(rows) == 11
        peaks = [p for _, p in rows]
        maxima = [
            i
            for i in range(1, len(peaks) - 1)
            if peaks[i] > peaks[i - 1]
            and peaks[i] >= peaks[i + 1]
            and peaks[i] > 0.5 * max(peaks)
        ]
        assert len(maxima) == 1
        assert rows[maxima[0]][0] == pytest.approx(0.05, abs=0.005)
        ncc_lines = (out / "ncc.csv").read_text().strip().splitlines()
        assert ncc_lines[0] == "slice,depth,z_reconstructed,ncc"
        assert len(ncc_lines) == 2

    def test_empty_range_usage_error(self, tmp_path):
        scene = make_point_scene(tmp_path)
        result = run_cli(
            "sweep", "--scene", str(scene), "--zmin", "0.1", "--zmax", "0.1",
            "--steps", "5", "--out", str(tmp_path / "o"),
        )
        assert result.returncode == 2


class TestUsage:
    def test_no_command(self):
        assert run_cli().returncode == 2

    def test_unknown_command(self):
        assert run_cli("render").returncode == 2

    def test_missing_required_option(self):
        assert run_cli("simulate", "--out", "/tmp/x").returncode == 2


def test_threads_env_var_fallback(tmp_path):
    import os

    scene = make_point_scene(tmp_path, nx=128, diffuse=True)
    out_env, out_flag = tmp_path / "env", tmp_path / "flag"
    env = dict(os.environ, HOLOSIM_THREADS="3")
    r1 = subprocess.run(
        [sys.executable, "-m", "holosim", "simulate", "--scene", str(scene),
         "--out", str(out_env), "--seed", "4", "--steps", "7"],
        capture_output=True, text=True, env=env, timeout=600,
    )
    r2 = run_cli(
        "simulate", "--scene", str(scene), "--out", str(out_flag),
        "--seed", "4", "--steps", "7", "--threads", "1",
    )
    assert r1.returncode == 0 and r2.returncode == 0
    assert (out_env / "report.csv").read_bytes() == (out_flag / "report.csv").read_bytes()
