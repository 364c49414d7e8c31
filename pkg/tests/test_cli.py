import json
import math
import subprocess
import sys

import pytest
import yaml

from skreflect import cli
from skreflect.config import ConfigError, from_mapping, load

NO_EVE = {
    "regime": "no_eve",
    "grid": {"snr_db": {"start": 0, "stop": 20, "step": 10}, "rho_ab": 0.9},
}
FULL = {
    "regime": "full_csie",
    "seed": 3,
    "n_channel_draws": 200,
    "grid": {"snr_db": [0, 30], "snr_eve_db": {"start": -10, "stop": 10, "num": 3}},
}


def _write(tmp_path, mapping, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(mapping))
    return path


def _main(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSweep:
    def test_no_eve_rows(self, tmp_path, capsys):
        out = tmp_path / "no_eve.csv"
        code, stdout, _ = _main(["sweep", _write(tmp_path, NO_EVE), "--output", out], capsys)
        assert code == 0 and stdout == ""
        rows = cli.read_results(out)
        assert [r["snr_db"] for r in rows] == [0.0, 10.0, 20.0]
        row = rows[1]
        assert row["lower_bits"] == row["upper_bits"] == pytest.approx(0.5 * math.log2(121 / 40), abs=1e-9)
        assert row["regime"] == "no_eve" and row["method"] == "exact"

    def test_header(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        _main(["sweep", _write(tmp_path, NO_EVE), "--output", out], capsys)
        header = out.read_text().splitlines()[0].split(",")
        assert header[:16] == ["snr_db", "snr_eve_db", "sigma2", "sigma2_e", "rho_ab", "rho_e",
                               "alpha", "regime", "lower_bits", "lower_stderr", "upper_bits",
                               "upper_stderr", "method", "n", "seed", "clamp_count"]

    def test_stdout_when_no_path(self, tmp_path, capsys):
        code, stdout, _ = _main(["sweep", _write(tmp_path, NO_EVE)], capsys)
        assert code == 0 and stdout.startswith("snr_db,")
        assert len(stdout.splitlines()) == 4

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_round_trip(self, tmp_path, fmt):
        config = from_mapping({**FULL, "output": {"path": str(tmp_path / f"r.{fmt}"), "format": fmt}})
        records = cli.run(config)
        assert cli.read_results(config.output_path) == [{c: r[c] for c in cli.COLUMNS} for r in records]

    def test_deterministic(self, tmp_path, capsys):
        cfg = _write(tmp_path, FULL)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        _main(["sweep", cfg, "--output", a], capsys)
        _main(["sweep", cfg, "--output", b], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_flag_overrides(self, tmp_path, capsys):
        out = tmp_path / "o.json"
        code, _, _ = _main(["sweep", _write(tmp_path, FULL), "--seed", 9, "--n-channel-draws", 150,
                            "--format", "json", "--output", out], capsys)
        assert code == 0
        rows = json.loads(out.read_text())
        assert {r["seed"] for r in rows} == {9} and {r["n"] for r in rows} == {150}

    def test_both_estimators(self, tmp_path, capsys):
        mapping = {"regime": "no_csie", "n_samples": 1000, "estimator": {"method": "both"},
                   "grid": {"snr_db": [0, 10], "sigma2_e": 1.0}}
        out = tmp_path / "both.csv"
        assert _main(["sweep", _write(tmp_path, mapping), "--output", out], capsys)[0] == 0
        rows = cli.read_results(out)
        assert [(r["snr_db"], r["method"]) for r in rows] == [
            (0.0, "knn"), (0.0, "kde"), (10.0, "knn"), (10.0, "kde")]

    def test_point_failure_does_not_abort(self, tmp_path, capsys, monkeypatch):
        from skreflect import bounds

        real = bounds.bounds_full_csie

        def flaky(params, n, seed):
            if params.sigma2 > 100:
                raise FloatingPointError("boom")
            return real(params, n, seed)

        monkeypatch.setattr(bounds, "bounds_full_csie", flaky)
        out = tmp_path / "f.csv"
        code, _, _ = _main(["sweep", _write(tmp_path, FULL), "--output", out], capsys)
        assert code == 0
        rows = cli.read_results(out)
        assert len(rows) == 6
        assert all(("boom" in r["error"]) == (r["snr_db"] == 30.0) for r in rows)
        assert all(math.isnan(r["lower_bits"]) for r in rows if r["error"])


class TestConfigErrors:
    @pytest.mark.parametrize("mapping, field", [
        ({**NO_EVE, "grid": {"snr_db": []}}, "grid.snr_db"),
        ({**NO_EVE, "grid": {"snr_db": {"start": 10, "stop": 0, "step": 1}}}, "grid.snr_db"),
        ({**NO_EVE, "grid": {"rho_ab": 0.9}}, "grid"),
        ({**NO_EVE, "regime": "partial"}, "regime"),
        ({**FULL, "n_channel_draws": 10}, "n_channel_draws"),
        ({**FULL, "n_samples": 0}, "n_samples"),
        ({**FULL, "seed": -1}, "seed"),
        ({**FULL, "estimator": {"method": "histogram"}}, "estimator.method"),
        ({**FULL, "estimator": {"k": 0}}, "estimator.k"),
        ({**FULL, "estimator": {"bandwidth": -1}}, "estimator.bandwidth"),
        ({**FULL, "output": {"format": "xml"}}, "output.format"),
        ({**FULL, "grid": {"snr_db": 0}}, "grid"),
        ({**FULL, "grid": {"snr_db": 0, "sigma2_e": 1, "rho_ab": 2}}, "grid"),
        ({**FULL, "colour": "red"}, "config"),
    ])
    def test_validation(self, tmp_path, capsys, mapping, field):
        code, stdout, stderr = _main(["sweep", _write(tmp_path, mapping)], capsys)
        assert code != 0 and stdout == ""
        assert field in stderr

    def test_yaml_syntax_error_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("regime: no_eve\ngrid:\n  snr_db: [0, 10\n")
        code, _, stderr = _main(["sweep", path], capsys)
        assert code == 2 and "line" in stderr

    def test_missing_file(self, tmp_path, capsys):
        assert _main(["sweep", tmp_path / "nope.yaml"], capsys)[0] == 2

    def test_axis_forms(self):
        cfg = from_mapping({"regime": "full_csie", "grid": {
            "sigma2": [1, 10], "sigma2_e": {"start": 0, "stop": 1, "num": 3},
            "rho_ab": 1.0, "alpha": [0.0, 0.1]}})
        pts = cfg.points()
        assert len(pts) == 12
        assert [p.sigma2_e for p in pts[:6:2]] == [0.0, 0.5, 1.0]
        assert pts[0].rho_ab == 1.0 and pts[1].alpha == 0.1

    def test_snr_eve_needs_alpha(self):
        with pytest.raises(ConfigError, match="alpha"):
            from_mapping({"regime": "full_csie", "grid": {"snr_db": 0, "snr_eve_db": 0,
                                                          "alpha": 0.0}}).points()


class TestAntenna:
    def test_lossless(self, capsys):
        code, stdout, _ = _main(["antenna", "--r-loss", 0, "--r-rad", 50, "--v-oc", 1, "--json"], capsys)
        report = json.loads(stdout)
        assert code == 0 and report["ratio"] == 0.5
        assert report["p_load"] + report["p_diss"] + report["p_rerad"] == report["p_total"]
        assert report["alpha_suggested"] == pytest.approx(math.sqrt(0.5))

    def test_lossy_table(self, capsys):
        code, stdout, _ = _main(["antenna", "--r-loss", 50, "--r-rad", 50, "--x-a", -3], capsys)
        assert code == 0
        lines = dict(line.split(None, 1) for line in stdout.splitlines())
        assert lines["ratio"] == "0.25"
        assert lines["z_load"] == "100 + 3j ohm"

    def test_invalid(self, capsys):
        code, stdout, stderr = _main(["antenna", "--r-rad", 0], capsys)
        assert code != 0 and stdout == "" and "radiation resistance" in stderr


def test_validate_estimators(capsys):
    code, stdout, _ = _main(["validate-estimators", "--dims", 1, 2, "--cases", 2,
                             "--n", 2000, "--methods", "knn"], capsys)
    lines = stdout.splitlines()
    assert len(lines) == 5
    assert all(line.split()[0] in ("PASS", "FAIL") for line in lines[:4])
    assert code == (0 if lines[-1].startswith("4/4") else 1)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "skreflect", "sweep", str(_write(tmp_path, NO_EVE))],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.count("\n") == 4 and "wrote" not in proc.stdout
