import os

import numpy as np
import pytest

from paraconvex import read_csv, write_csv
from paraconvex.cli import main
from paraconvex.reporting import fmt


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestCsvRoundTrip:
    def test_exact_float_round_trip(self, tmp_path):
        path = str(tmp_path / "table.csv")
        header = ["name", "value"]
        rows = [["a", fmt(1.0 / 3.0)], ["b", fmt(2.0 ** -40)]]
        write_csv(path, header, rows)
        got_header, got_rows = read_csv(path)
        assert got_header == header
        assert got_rows == rows
        assert float(got_rows[0][1]) == 1.0 / 3.0

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_csv(str(path))


class TestConstantsVerb:
    def test_writes_table(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main(["constants", "--out", out, "--alpha", "0.0,0.5"])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "threshold root" in stdout
        csvs = [f for f in os.listdir(out) if f.endswith(".csv")]
        assert len(csvs) == 1
        header, rows = read_csv(os.path.join(out, csvs[0]))
        assert len(rows) == 2
        assert float(rows[1][1]) == pytest.approx(0.8660254037844386,
                                                  abs=1e-15)

    def test_reruns_are_byte_identical(self, tmp_path):
        out1 = str(tmp_path / "one")
        out2 = str(tmp_path / "two")
        assert main(["constants", "--out", out1]) == 0
        assert main(["constants", "--out", out2]) == 0
        names = sorted(os.listdir(out1))
        assert names == sorted(os.listdir(out2))
        for name in names:
            assert read_bytes(os.path.join(out1, name)) == \
                read_bytes(os.path.join(out2, name))

    def test_out_dir_env_fallback(self, tmp_path, monkeypatch):
        target = str(tmp_path / "envdir")
        monkeypatch.setenv("PARACONVEX_OUT", target)
        assert main(["constants"]) == 0
        assert os.path.isdir(target)
        assert any(f.endswith(".csv") for f in os.listdir(target))


class TestAnalyzeVerb:
    def test_profile_artifacts(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main(["analyze", "segment", "--density", "50",
                     "--radii", "0.3,0.6,1.0", "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "alpha_max = 0.000000" in stdout
        files = os.listdir(out)
        assert any(f.endswith("_profile.csv") for f in files)
        assert any(f.endswith(".svg") for f in files)

    def test_unknown_scene_is_usage_error(self, tmp_path, capsys):
        code = main(["analyze", "klein_bottle",
                     "--out", str(tmp_path / "x")])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestRetractVerb:
    def test_requires_beta(self):
        with pytest.raises(SystemExit) as err:
            main(["retract", "segment"])
        assert err.value.code == 2

    def test_certified_run(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main(["retract", "segment", "--beta", "0.5",
                     "--density", "60", "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "movement violations: 0" in stdout
        assert any(f.endswith("_retract.csv") for f in os.listdir(out))

    def test_uncertified_beta_fails(self, tmp_path, capsys):
        code = main(["retract", "two_points", "--beta", "0.5",
                     "--out", str(tmp_path / "x")])
        assert code == 1
        assert "failure:" in capsys.readouterr().err


class TestSpaceVerb:
    def test_flat_scene_report(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main(["space", "segment", "--density", "40",
                     "--ensemble", "3", "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "space paraconvexity estimate" in stdout
        files = [f for f in os.listdir(out) if f.endswith("_space.csv")]
        assert len(files) == 1
        header, rows = read_csv(os.path.join(out, files[0]))
        assert header[0] == "scene"
        assert all(row[-1] == "true" for row in rows)


class TestFamilyVerb:
    def test_rotating_segment_family(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = main(["family", "segment", "--sweep", "rotation:0:0.3:3",
                     "--density", "40", "--out", out])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "worst ratio" in stdout
        files = os.listdir(out)
        assert any(f.endswith("_modulus.csv") for f in files)

    def test_bad_sweep_is_usage_error(self, tmp_path):
        code = main(["family", "segment", "--sweep", "rotation:0:1",
                     "--out", str(tmp_path / "x")])
        assert code == 2
