import csv
import json

import numpy as np
import pytest

from wiremodel import cli
from wiremodel.linksim import sweep
from wiremodel.pplmodel import CoefficientTable, builtin_table


def run(*argv):
    return cli.main([str(a) for a in argv])


def synth_sweep(path, rows, frames=10**15):
    """Sweep CSV whose loss counts follow the given coefficient rows exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sweep.CSV_HEADER)
        for mod, n, snrs in rows:
            co = builtin_table().lookup(mod, (n, n))
            for s in snrs:
                p = min(max(co(s), 0.0), 100.0)
                lost = round(p / 100 * frames)
                w.writerow([mod, n, n, float(s), "rayleigh", frames, lost, repr(100 * lost / frames), "0.0", 0])


class TestPredict:
    def test_json(self, tmp_path):
        out = tmp_path / "p.json"
        reg = tmp_path / "reg.json"
        reg.write_text(json.dumps([{"name": "WB10", "band": "WB", "ie": 10, "bpl": 10}]))
        assert run("predict", "--modulation", "QPSK", "--n-tx", 2, "--m-rx", 2, "--snr", 20,
                   "--profile", "WB10", "--codec-registry", reg, "--out", out) == 0
        rec = json.loads(out.read_text())
        assert rec["ppl_prime_pct"] == pytest.approx(2.3612147870489132e-05)
        assert rec["ie_eff"] == pytest.approx(10.0, abs=1e-3)
        assert rec["r_score"] == pytest.approx(119.0, abs=1e-3)
        assert rec["r_nb"] == pytest.approx(119 * 100 / 129, abs=1e-3)
        man = json.loads((tmp_path / "p.json.manifest.json").read_text())
        assert man["version"] and man["config"]["snr_db"] == 20.0
        assert "time" not in json.dumps(man).lower()

    def test_saturated(self, capsys):
        assert run("predict", "--modulation", "QPSK", "--n-tx", 1, "--m-rx", 1, "--snr", 1,
                   "--codec", "AMR", "--mode", 4, "--format", "csv") == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert float(rows[0]["ppl_prime_pct"]) == 100.0
        assert float(rows[0]["mos"]) <= 1.05

    def test_missing_row(self, tmp_path, capsys):
        t = CoefficientTable([r for r in builtin_table().rows() if r.modulation.value != "QAM64"])
        t.save(tmp_path / "t.json")
        rc = run("predict", "--modulation", "QAM64", "--n-tx", 2, "--m-rx", 2, "--snr", 10,
                 "--coeff-table", tmp_path / "t.json")
        assert rc == 2
        assert "QAM64" in capsys.readouterr().err

    def test_unknown_profile(self):
        assert run("predict", "--modulation", "QPSK", "--n-tx", 1, "--m-rx", 1, "--snr", 10, "--profile", "nope") == 2

    def test_bad_snr(self):
        assert run("predict", "--modulation", "QPSK", "--n-tx", 1, "--m-rx", 1, "--snr", -2) == 2

    def test_missing_table_file_is_io(self, tmp_path):
        rc = run("predict", "--modulation", "QPSK", "--n-tx", 1, "--m-rx", 1, "--snr", 10,
                 "--coeff-table", tmp_path / "absent.json")
        assert rc == 3

    def test_never_simulates(self, monkeypatch):
        def boom(*a, **k):
            raise AssertionError("simulator called")

        monkeypatch.setattr(sweep, "simulate_point", boom)
        monkeypatch.setattr(sweep, "measure_ppl_sweep", boom)
        monkeypatch.setattr(cli, "measure_ppl_sweep", boom)
        assert run("predict", "--modulation", "BPSK", "--n-tx", 3, "--m-rx", 3, "--snr", 5) == 0

    def test_usage_error(self):
        assert run("predict", "--modulation", "QPSK") == 2


class TestSimulate:
    def test_default_grid(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run("simulate", "--out", out, "--seed", 1) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 124
        man = json.loads((tmp_path / "s.csv.manifest.json").read_text())
        assert man["config"]["frames"] == 500 and "threads" not in json.dumps(man)

    def test_rerun_identical(self, tmp_path):
        args = ["simulate", "--snr", "0:10:5", "--antennas", "2x2", "--frames", 40, "--seed", 2]
        run(*args, "--out", tmp_path / "a.csv")
        run(*args, "--out", tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert run("simulate", "--snr", "5", "--antennas", "1x1", "--frames", 5, "--out", blocker / "x.csv") == 3

    def test_bad_range(self):
        assert run("simulate", "--snr", "10:0", "--frames", 5) == 2


class TestFitValidate:
    def test_recovers_table_rows(self, tmp_path):
        path = tmp_path / "syn.csv"
        synth_sweep(path, [("QPSK", 1, range(6, 16)), ("QPSK", 2, np.arange(2.0, 9.5, 0.5))])
        assert run("fit", path, "--out", tmp_path / "fit.json") == 0
        report = json.loads((tmp_path / "fit.json").read_text())
        assert len(report) == 2
        table = CoefficientTable.load(tmp_path / "fit.table.json")
        for row in table.rows():
            ref = builtin_table().lookup(row.modulation, row.antennas)
            assert row.provenance == "fitted"
            assert row.coeffs.a == pytest.approx(ref.a, rel=0.01)
            assert row.coeffs.b == pytest.approx(ref.b, rel=0.01)
            assert row.coeffs.c == pytest.approx(ref.c, rel=0.01)
        # the fitted table feeds straight back into predict
        assert run("predict", "--modulation", "QPSK", "--n-tx", 2, "--m-rx", 2, "--snr", 5,
                   "--coeff-table", tmp_path / "fit.table.json", "--out", tmp_path / "p.json") == 0
        # and validate against itself is essentially perfect
        assert run("validate", path, "--coeff-table", tmp_path / "fit.table.json", "--codecs", "AMR-WB-2",
                   "--out", tmp_path / "v.json") == 0
        v = json.loads((tmp_path / "v.json").read_text())
        assert v["pooled"]["pcc"] == pytest.approx(1.0, abs=1e-6)
        assert v["pooled"]["rmse"] < 1e-3

    def test_skips_thin_group(self, tmp_path):
        path = tmp_path / "syn.csv"
        synth_sweep(path, [("QPSK", 1, range(6, 16)), ("QPSK", 4, [1, 2])])
        assert run("fit", path, "--out", tmp_path / "fit.json") == 0
        assert len(json.loads((tmp_path / "fit.json").read_text())) == 1

    def test_malformed_csv(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("modulation,foo\nQPSK,1\n")
        assert run("fit", p) == 2

    def test_validate_per_codec_binding(self, tmp_path, capsys):
        path = tmp_path / "syn.csv"
        synth_sweep(path, [("QPSK", 1, range(6, 16))])
        assert run("validate", f"AMR-4={path}", f"AMR-WB-8={path}", "--codecs", "AMR-4,AMR-WB-8",
                   "--format", "csv") == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert {r["codec"] for r in rows} == {"AMR-4", "AMR-WB-8"}


def test_export_tables(tmp_path):
    assert run("export-tables", "--out", tmp_path) == 0
    assert CoefficientTable.load(tmp_path / "coefficients.builtin.json").to_json() == builtin_table().to_json()
    assert len(json.loads((tmp_path / "layouts.json").read_text())) == 17
    assert len(json.loads((tmp_path / "codecs.json").read_text())) == 4
