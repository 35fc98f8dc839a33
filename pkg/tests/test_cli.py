import json
import subprocess
import sys

import numpy as np
import pytest

from dilation_lab.artifacts import read_boundary_csv, read_csv_rows
from dilation_lab.cli import main
from dilation_lab.numrange import SupportProfile, hausdorff

FULL = {"full": True}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def z1(tmp_path):
    return write(tmp_path, "z.json", {"N": 1, "factors": [{"lambda": [0, 0], "projection": FULL}]})


@pytest.fixture
def z2(tmp_path):
    return write(tmp_path, "z2.json", {"N": 1, "factors": [{"lambda": [0, 0], "projection": FULL}] * 2})


@pytest.fixture
def zi2(tmp_path):
    return write(tmp_path, "zi2.json", {"N": 2, "factors": [{"lambda": [0, 0], "projection": FULL}]})


class TestModel:
    def test_z_squared_json(self, z2, capsys):
        assert main(["model", "--config", z2, "--format", "json"]) == 0
        out = json.loads(capsys.readouterr().out)
        S = np.array([[complex(*e) for e in row] for row in out["S"]])
        assert out["d"] == 2 and np.allclose(S, [[0, 0], [1, 0]], atol=1e-12)
        assert out["meta"]["config_hash"]

    def test_z_identity_text(self, zi2, capsys):
        assert main(["model", "--config", zi2]) == 0
        out = capsys.readouterr().out
        assert "d = 2" in out and "sigma_max(Theta(0)) = 0" in out

    def test_not_pure(self, tmp_path, capsys):
        cfg = write(tmp_path, "np.json", {"N": 2, "factors": [
            {"lambda": [0.5, 0], "projection": {"span": [[[1, 0], [0, 0]]]}}]})
        assert main(["model", "--config", cfg]) == 1
        assert "NotPure" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("[")
        assert main(["model", "--config", str(p)]) == 1


class TestNrange:
    def test_grid4_csv(self, z2, tmp_path):
        out = tmp_path / "w.csv"
        assert main(["nrange", "--config", z2, "--grid", "4", "--out", str(out)]) == 0
        meta, rows = read_csv_rows(out)
        assert len(rows) == 4 and list(rows[0]) == ["angle", "support", "boundary_x", "boundary_y"]
        assert meta["config_hash"]

    def test_z_squared_intersection(self, z2, tmp_path):
        out = tmp_path / "i.csv"
        assert main(["nrange", "--config", z2, "--target", "intersection", "--out", str(out)]) == 0
        prof, _ = read_boundary_csv(out)
        assert hausdorff(prof, SupportProfile.disc(0.5)) <= 5e-3

    def test_z_intersection_collapses(self, z1, tmp_path):
        out = tmp_path / "i.csv"
        assert main(["nrange", "--config", z1, "--target", "intersection", "--out", str(out)]) == 0
        prof, _ = read_boundary_csv(out)
        assert np.max(np.abs(prof.values)) <= 5e-3

    def test_dilation_target_and_svg(self, z2, tmp_path):
        out = tmp_path / "d.svg"
        assert main(["nrange", "--config", z2, "--target", "dilation:phase:0", "--samples", "16",
                     "--out", str(out)]) == 0
        text = out.read_text()
        assert text.count("<polygon") == 12 + 3 and "config_hash" in text

    def test_bad_target(self, z1):
        assert main(["nrange", "--config", z1, "--target", "nowhere"]) == 1

    def test_deterministic(self, tmp_path):
        cfg = write(tmp_path, "r.json", {"N": 2, "factors": [
            {"lambda": [0.3, 0.1], "projection": FULL}, {"lambda": [0, 0.2], "projection": {"span": [[[1, 0], [1, 0]]]}}]})
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert main(["nrange", "--config", cfg, "--target", "intersection", "--samples", "8",
                         "--seed", "4", "--out", str(p)]) == 0
        assert a.read_text() == b.read_text()


class TestVerify:
    def test_scalar_z_all(self, z1, capsys):
        assert main(["verify", "--config", z1, "--suite", "all"]) == 0
        assert "result: PASS" in capsys.readouterr().out

    def test_bad_omega(self, z1):
        assert main(["verify", "--config", z1, "--omega", "[[[2, 0]]]"]) == 1

    def test_near_boundary_never_silent(self, tmp_path):
        cfg = write(tmp_path, "nb.json", {"N": 1, "factors": [
            {"lambda": [0, 0], "projection": FULL}, {"lambda": [0.999999, 0], "projection": FULL}]})
        assert main(["verify", "--config", cfg, "--suite", "defects"]) in (0, 2)

    def test_report_file(self, z2, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--config", z2, "--suite", "dilation", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["passed"] and rep["meta"]["config_hash"] and rep["checks"]


class TestConverge:
    def test_truncation_strictly_decreasing(self, tmp_path):
        cfg = write(tmp_path, "t.json", {
            "N": 1, "factors": [{"lambda": [1 - 2.0**-j, 0], "projection": FULL} for j in range(1, 7)],
            "converge": {"depths": [2, 3, 4, 5, 6]}})
        out = tmp_path / "t.csv"
        assert main(["converge", "--config", cfg, "--out", str(out)]) == 0
        _, rows = read_csv_rows(out)
        hd = [float(r["hausdorff"]) for r in rows]
        assert all(a > b for a, b in zip(hd, hd[1:])) and hd[-1] == 0.0

    def test_frostman(self, tmp_path):
        cfg = write(tmp_path, "f.json", {"N": 1, "factors": [
            {"lambda": [0, 0], "projection": FULL}, {"lambda": [0.4, 0.2], "projection": FULL}],
            "converge": {"lambdas": [[0.3, 0], [0.1, 0.1], [0, 0]]}})
        out = tmp_path / "f.csv"
        assert main(["converge", "--config", cfg, "--mode", "frostman", "--out", str(out)]) == 0
        _, rows = read_csv_rows(out)
        for r in rows:
            assert float(r["sup_circle"]) <= float(r["bound"]) + 1e-12
        assert float(rows[-1]["sup_circle"]) == 0.0 and float(rows[-1]["hausdorff"]) == 0.0



class TestSpectrum:
    def test_cube_roots(self, z2, tmp_path):
        out = tmp_path / "s.json"
        assert main(["spectrum", "--config", z2, "--omega", "phase:0", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        z = np.array([complex(*e) for e in rep["eigenvalues"]])
        assert np.allclose(np.sort(np.mod(np.angle(z) + 1e-9, 2 * np.pi)), [0, 2 * np.pi / 3, 4 * np.pi / 3], atol=1e-8)
        assert max(rep["residuals"]) <= 1e-9
        _, rows = read_csv_rows(out.with_suffix(".scan.csv"))
        assert len(rows) == 4096

    def test_square_root_of_i(self, z1, capsys):
        assert main(["spectrum", "--config", z1, "--omega", "phase:1.5707963267948966"]) == 0
        out = capsys.readouterr().out
        assert "0.25000000" in out and "1.25000000" in out

    def test_multiplicity(self, zi2, capsys):
        assert main(["spectrum", "--config", zi2]) == 0
        assert capsys.readouterr().out.count("multiplicity = 2") == 2

    def test_non_unitary(self, z1):
        assert main(["spectrum", "--config", z1, "--omega", "[[[0.5, 0]]]"]) == 1


def test_console_script(z1):
    out = subprocess.run([sys.executable, "-m", "dilation_lab.cli", "model", "--config", z1],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "d = 1" in out.stdout
