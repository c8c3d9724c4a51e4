import numpy as np
import pytest

from eiko.cli import main
from eiko.field import GridSpec, ScalarField
from eiko.formats import read_field, read_kv, write_field, write_pgm


def run(*argv):
    return main(list(argv))


def read_report(path):
    return read_kv(path)


class TestExitCodes:
    def test_unknown_backend_is_usage_error(self, tmp_path, capsys):
        rc = run("solve", "--backend", "sparse", "--fixture", "nope",
                 "--out", str(tmp_path / "o"))
        assert rc == 1

    def test_missing_forcing_file(self, tmp_path):
        rc = run("solve", "--backend", "sweep", "--forcing",
                 str(tmp_path / "missing.eikf"), "--source", "0,0",
                 "--out", str(tmp_path / "o"))
        assert rc == 1

    def test_solver_failure_is_exit_2(self, tmp_path):
        rc = run(
            "solve", "--backend", "sparse", "--fixture", "unit-disc",
            "--fixture-size", "33", "--hbar", "0.05", "--tol", "1e-14",
            "--max-iter", "2", "--out", str(tmp_path / "o"),
        )
        assert rc == 2

    def test_no_partial_outputs_on_usage_error(self, tmp_path):
        out = tmp_path / "outdir"
        rc = run("solve", "--backend", "perturb", "--fixture", "unit-disc",
                 "--source", "99,99", "--out", str(out))
        assert rc == 1
        assert not out.exists()

    def test_unreachable_start_is_exit_3(self, tmp_path):
        # the start sits in a sealed room: phi underflows to the floor there,
        # the recovered field is exactly flat, and descent stalls
        img = np.zeros((81, 81), dtype=np.uint8)
        img[15:66, 15:66] = 255
        img[37:44, 37:44] = 0
        maze = tmp_path / "maze.pgm"
        write_pgm(maze, img)
        out = tmp_path / "o"
        rc = run(
            "plan", "--maze", str(maze), "--source", "5,5", "--start", "40,40",
            "--hbar", "2.0", "--hi", "1e8", "--out", str(out),
        )
        assert rc == 3
        assert "# status: stalled" in (out / "path_0.csv").read_text()


class TestCompare:
    def test_identical_fields(self, tmp_path, capsys):
        g = GridSpec((6, 6), (0.0, 0.0), (1.0, 1.0))
        f = ScalarField(g, np.full((6, 6), 2.0))
        p = tmp_path / "f.eikf"
        write_field(p, f)
        rc = run("compare", str(p), str(p))
        assert rc == 0
        assert capsys.readouterr().out.strip() == "0.000000 0.000000"

    def test_grid_mismatch_exit_1(self, tmp_path):
        ga = GridSpec((6, 6), (0.0, 0.0), (1.0, 1.0))
        gb = GridSpec((6, 6), (0.0, 0.0), (2.0, 2.0))
        pa, pb = tmp_path / "a.eikf", tmp_path / "b.eikf"
        write_field(pa, ScalarField(ga, np.ones((6, 6))))
        write_field(pb, ScalarField(gb, np.ones((6, 6))))
        assert run("compare", str(pa), str(pb)) == 1

    def test_source_exclusion(self, tmp_path, capsys):
        g = GridSpec((4, 4), (0.0, 0.0), (1.0, 1.0))
        ref = np.ones((4, 4))
        ref[2, 2] = 0.0
        est = np.ones((4, 4)) * 1.01
        pa, pb = tmp_path / "a.eikf", tmp_path / "b.eikf"
        write_field(pa, ScalarField(g, est))
        write_field(pb, ScalarField(g, ref))
        rc = run("compare", str(pa), str(pb), "--sources", "2,2")
        assert rc == 0
        out = capsys.readouterr().out.split()
        assert float(out[0]) == pytest.approx(1.0, abs=1e-4)


class TestSolveOutputs:
    def test_sweep_fixture_run_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "run"
        rc = run("solve", "--backend", "sweep", "--fixture", "unit-disc",
                 "--fixture-size", "33", "--csv", "--out", str(out))
        assert rc == 0
        assert (out / "s_star.eikf").exists()
        assert (out / "s_star.csv").exists()
        rep = read_report(out / "report.txt")
        assert rep["backend"] == "sweep"
        assert float(rep["reference_percent_error"]) < 5.0
        man = read_kv(out / "manifest.txt")
        assert man["command"] == "solve"
        assert man["tool"] == "eiko"
        field = read_field(out / "s_star.eikf")
        assert field.grid.dims == (33, 33)

    def test_forcing_file_round_trip(self, tmp_path):
        g = GridSpec((17, 17), (-1.0, -1.0), (0.125, 0.125))
        f = ScalarField(g, np.ones((17, 17)))
        forcing = tmp_path / "f.eikf"
        write_field(forcing, f)
        out = tmp_path / "run"
        rc = run("solve", "--backend", "perturb", "--forcing", str(forcing),
                 "--source", "8,8", "--hbar", "0.1", "--out", str(out))
        assert rc == 0
        s = read_field(out / "s_star.eikf")
        assert s.values[8, 8] == pytest.approx(0.0, abs=1e-9)


class TestReplayDeterminism:
    def _strip_timing(self, path):
        return [
            line
            for line in path.read_text().splitlines()
            if not line.startswith("wall_time")
        ]

    def test_solve_replay_byte_identical(self, tmp_path):
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        rc = run("solve", "--backend", "sparse", "--fixture", "unit-disc",
                 "--fixture-size", "33", "--hbar", "0.05", "--out", str(out1))
        assert rc == 0
        rc = run("replay", str(out1 / "manifest.txt"), "--out", str(out2))
        assert rc == 0
        assert (out1 / "s_star.eikf").read_bytes() == (out2 / "s_star.eikf").read_bytes()
        assert self._strip_timing(out1 / "report.txt") == self._strip_timing(
            out2 / "report.txt"
        )

    def test_plan_replay_byte_identical(self, tmp_path):
        out1 = tmp_path / "p1"
        out2 = tmp_path / "p2"
        rc = run("plan", "--fixture", "open-room", "--out", str(out1))
        assert rc == 0
        rc = run("replay", str(out1 / "manifest.txt"), "--out", str(out2))
        assert rc == 0
        assert (out1 / "path_0.csv").read_bytes() == (out2 / "path_0.csv").read_bytes()
        assert (out1 / "s_star.eikf").read_bytes() == (out2 / "s_star.eikf").read_bytes()


class TestPlanCli:
    def test_open_room_near_straight(self, tmp_path, capsys):
        out = tmp_path / "room"
        rc = run("plan", "--fixture", "open-room", "--out", str(out))
        assert rc == 0
        rows = (out / "path_0.csv").read_text().splitlines()
        assert rows[0] == "x,y"
        assert rows[-1] == "# status: reached_source"
        pts = np.array([[float(v) for v in r.split(",")] for r in rows[1:-1]])
        seg = np.hypot(*np.diff(pts, axis=0).T).sum()
        straight = np.hypot(*(pts[0] - np.array([5.0, 5.0])))
        assert seg <= 1.1 * straight

    def test_pgm_maze_input(self, tmp_path):
        img = np.zeros((15, 15), dtype=np.uint8)
        maze = tmp_path / "m.pgm"
        write_pgm(maze, img, binary=False)
        out = tmp_path / "o"
        rc = run("plan", "--maze", str(maze), "--source", "7,7",
                 "--start", "2,2", "--hbar", "2.0", "--out", str(out))
        assert rc == 0


class TestSfsCli:
    def test_plane_fixture(self, tmp_path, capsys):
        out = tmp_path / "sfs"
        rc = run("sfs", "--fixture", "plane", "--fixture-size", "33",
                 "--out", str(out))
        assert rc == 0
        rep = read_report(out / "report.txt")
        assert float(rep["gradient_error"]) < 0.2

    def test_image_input(self, tmp_path):
        # render a small cone into a PGM and reconstruct from the file
        from eiko import fixtures

        fx = fixtures.build("cone", n=33)
        px = np.rint(fx.luminance.values * 255).astype(np.uint8)
        img = tmp_path / "cone.pgm"
        write_pgm(img, px)
        out = tmp_path / "o"
        c = fx.truth.grid.center_index()
        rc = run("sfs", "--image", str(img), "--seed", f"{c[0]},{c[1]}:0.7",
                 "--hbar", "0.1", "--out", str(out))
        assert rc == 0
        h = read_field(out / "height.eikf")
        assert h.values[c] == pytest.approx(0.7, abs=0.05)


def test_fixture_listing(capsys):
    assert run("fixtures") == 0
    names = capsys.readouterr().out.split()
    assert "example1" in names and "spiral-maze" in names
