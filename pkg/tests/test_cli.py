"""Command-line interface: schemas, manifests, exit codes, reproducibility."""

import csv
import json
import math

import pytest

from mimo_precode.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestProfileCommand:
    def test_profile_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "p4.json"
        assert main(["profile", "--order", "4", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["order"] == 4
        assert len(doc["segments"]) == 2
        assert doc["segments"][1]["gamma_lo"] == pytest.approx(
            math.atan(1 / math.sqrt(7)), abs=1e-9)
        manifest = json.loads((tmp_path / "p4.json.manifest.json").read_text())
        assert manifest["command"] == "profile"
        assert manifest["parameters"]["order"] == 4
        assert "theta" in capsys.readouterr().out

    def test_bad_order_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["profile", "--order", "12", "--out", str(tmp_path / "x.json")])
        assert exc.value.code == 2


class TestDeltaCurveCommand:
    def test_rows_and_scale4(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["delta-curve", "--order", "4", "--precoder", "y",
                     "--points", "40", "--out", str(a)]) == 0
        assert main(["delta-curve", "--order", "4", "--precoder", "y",
                     "--points", "40", "--scale4", "--out", str(b)]) == 0
        rows_a, rows_b = read_csv(a), read_csv(b)
        assert rows_a[0] == ["gamma", "delta"]
        assert len(rows_a) == 41
        for ra, rb in zip(rows_a[1:], rows_b[1:]):
            assert float(rb[1]) == pytest.approx(4.0 * float(ra[1]), rel=1e-12)

    def test_edmin_wrong_order_unsupported(self, tmp_path):
        code = main(["delta-curve", "--order", "16", "--precoder", "edmin",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 4


class TestWepCommand:
    def test_grid_rows_and_schema(self, tmp_path):
        out = tmp_path / "w.csv"
        assert main(["wep", "--nt", "2", "--nr", "2", "--order", "4",
                     "--precoder", "x", "--snr-db", "0:4:28", "--trials", "50",
                     "--seed", "42", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["snr_db", "trials", "word_errors", "wep", "ci_halfwidth"]
        assert len(rows) == 9  # 8 grid points + header
        assert [r[0] for r in rows[1:]] == [repr(float(v)) for v in range(0, 29, 4)]

    def test_rerun_from_manifest_byte_identical(self, tmp_path):
        out1 = tmp_path / "w1.csv"
        out2 = tmp_path / "w2.csv"
        args = ["--nt", "2", "--nr", "2", "--order", "4", "--precoder", "y",
                "--snr-db", "6:6:18", "--trials", "300", "--seed", "7"]
        assert main(["wep", *args, "--workers", "1", "--out", str(out1)]) == 0
        manifest = json.loads((tmp_path / "w1.csv.manifest.json").read_text())
        params = manifest["parameters"]
        assert main(["wep", "--nt", str(params["nt"]), "--nr", str(params["nr"]),
                     "--order", str(params["order"]), "--precoder", params["precoder"],
                     "--snr-db", params["snr_db"], "--trials", str(params["trials"]),
                     "--seed", str(params["seed"]), "--workers", "2",
                     "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_odd_dimension_unsupported(self, tmp_path):
        code = main(["wep", "--nt", "3", "--nr", "3", "--order", "4",
                     "--precoder", "x", "--snr-db", "10:2:12", "--trials", "10",
                     "--seed", "1", "--out", str(tmp_path / "x.csv")])
        assert code == 4


class TestStatsCommands:
    def test_zeta_schema(self, tmp_path):
        out = tmp_path / "z.csv"
        assert main(["zeta", "--nt", "2", "--order", "4", "--trials", "500",
                     "--seed", "3", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["zeta_min", "p_zeta", "trials"]
        assert float(rows[1][0]) == 1.0
        assert float(rows[1][1]) == 0.0

    def test_nosearch_schema(self, tmp_path, profile4):
        out = tmp_path / "n.csv"
        assert main(["nosearch", "--nt", "2", "--order", "4", "--trials", "4000",
                     "--seed", "3", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["pair_index", "probability", "trials"]
        assert float(rows[1][1]) == pytest.approx(0.578, abs=0.03)
