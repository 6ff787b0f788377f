import json
import math

import numpy as np
import pytest

from betarc import report
from betarc.cli import main, read_series_csv
from betarc.errors import DataError


def run_cli(*args) -> int:
    return main(list(args))


def write_y_csv(path, y, header="y"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for v in y:
            fh.write(f"{v!r}\n")


@pytest.fixture()
def bern_csv(tmp_path):
    """A pure chaotic bernoulli sample written the way `fit` ingests it."""
    rc = run_cli("simulate", "--map", "bernoulli", "--theta", "3",
                 "--nu", "40", "--u0", "0.23141592", "--n", "120",
                 "--seed", "1", "--out", str(tmp_path / "sim.csv"))
    assert rc == 0
    ys = [row.split(",")[0] for row in
          (tmp_path / "sim.csv").read_text().splitlines()[1:]]
    data = tmp_path / "data.csv"
    write_y_csv(data, [float(v) for v in ys])
    return data


class TestSimulate:
    def test_writes_series(self, tmp_path):
        out = tmp_path / "s.csv"
        rc = run_cli("simulate", "--map", "bernoulli", "--theta", "3",
                     "--nu", "40", "--u0", "0.23141592", "--n", "100",
                     "--seed", "1", "--out", str(out))
        assert rc == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "y,mu"
        assert len(rows) == 101
        ys = np.array([float(r.split(",")[0]) for r in rows[1:]])
        assert np.all((ys > 0) & (ys < 1))

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli("simulate", "--map", "mp", "--theta", "0.75",
                           "--nu", "25", "--u0", "0.7853981", "--n", "64",
                           "--seed", "9", "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_flag_named(self, tmp_path, capsys):
        rc = run_cli("simulate", "--map", "bernoulli", "--theta", "3",
                     "--nu", "-1", "--u0", "0.5", "--n", "10",
                     "--out", str(tmp_path / "x.csv"))
        assert rc == 2
        assert "--nu" in capsys.readouterr().err

    def test_bad_map_parameter(self, tmp_path, capsys):
        rc = run_cli("simulate", "--map", "bernoulli", "--theta", "2.5",
                     "--nu", "10", "--u0", "0.5", "--n", "10",
                     "--out", str(tmp_path / "x.csv"))
        assert rc == 2
        assert "--map" in capsys.readouterr().err

    def test_precision_effect_on_scatter(self, tmp_path):
        devs = {}
        for nu in ("6", "120"):
            out = tmp_path / f"nu{nu}.csv"
            assert run_cli("simulate", "--map", "mp", "--theta", "0.3",
                           "--nu", nu, "--u0", "0.7853981", "--n", "300",
                           "--seed", "2", "--out", str(out)) == 0
            rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
            y = np.array([float(r[0]) for r in rows])
            mu = np.array([float(r[1]) for r in rows])
            devs[nu] = float(np.mean(np.abs(y - mu)))
        assert devs["120"] < devs["6"]


class TestFit:
    def test_fixed_u0_report(self, tmp_path, bern_csv):
        out = tmp_path / "report.json"
        rc = run_cli("fit", "--data", str(bern_csv), "--map", "bernoulli",
                     "--theta", "3", "--u0", "0.23141592", "--holdout", "6",
                     "--out", str(out))
        assert rc == 0
        doc = report.parse(out.read_text())
        report.validate(doc)
        assert doc["model"]["family"] == "bernoulli"
        assert doc["converged"] is True
        assert doc["n_obs"] == 114
        assert len(doc["forecasts"]) == 6
        assert len(doc["holdout_actual"]) == 6
        nu_hat = [e["value"] for e in doc["estimates"] if e["name"] == "nu"][0]
        assert 25.0 < nu_hat < 60.0
        # report emit/parse round trip is the identity on the document
        assert report.parse(report.emit(doc)) == doc

    def test_no_holdout_omits_out_of_sample(self, tmp_path, bern_csv):
        out = tmp_path / "report.json"
        rc = run_cli("fit", "--data", str(bern_csv), "--map", "bernoulli",
                     "--theta", "3", "--u0", "0.23141592", "--out", str(out))
        assert rc == 0
        doc = report.parse(out.read_text())
        assert "out_of_sample" not in doc["accuracy"]
        assert "forecasts" not in doc

    def test_u0_grid_trace_in_report(self, tmp_path, bern_csv):
        out = tmp_path / "report.json"
        rc = run_cli("fit", "--data", str(bern_csv), "--map", "bernoulli",
                     "--theta", "3", "--u0-grid", "12", "--out", str(out))
        assert rc == 0
        doc = report.parse(out.read_text())
        report.validate(doc)
        assert len(doc["u0_grid_trace"]) == 12
        best = max(ll for _, ll in doc["u0_grid_trace"])
        assert doc["loglik"] == pytest.approx(best, abs=1e-9)

    def test_y_out_of_range_names_row(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        write_y_csv(bad, [0.5, 0.7, 1.4, 0.2])
        rc = run_cli("fit", "--data", str(bad), "--map", "bernoulli",
                     "--theta", "3", "--u0", "0.5",
                     "--out", str(tmp_path / "r.json"))
        assert rc == 3
        err = capsys.readouterr().err
        assert ":4:" in err  # header is line 1, offending y is line 4

    def test_missing_y_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("value\n0.5\n")
        rc = run_cli("fit", "--data", str(bad), "--map", "bernoulli",
                     "--theta", "3", "--u0", "0.5",
                     "--out", str(tmp_path / "r.json"))
        assert rc == 3

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--map", "bernoulli"])  # --data and u0 missing
        assert exc.value.code == 2


class TestMC:
    def test_preset_summary(self, tmp_path):
        out = tmp_path / "mc"
        rc = run_cli("mc", "--preset", "table1", "--replicates", "2",
                     "--seed", "7", "--out-dir", str(out))
        assert rc == 0
        doc = json.loads((out / "summary.json").read_text())
        assert len(doc["cells"]) == 27
        assert doc["replicates"] == 2
        assert (out / "cell00_replicates.csv").exists()
        assert (out / "cell26_replicates.csv").exists()

    def test_single_replicate_sd_zero(self, tmp_path):
        out = tmp_path / "mc"
        rc = run_cli("mc", "--preset", "table1", "--replicates", "1",
                     "--seed", "7", "--out-dir", str(out))
        assert rc == 0
        doc = json.loads((out / "summary.json").read_text())
        assert all(c["sd"] == 0.0 for c in doc["cells"])

    def test_deterministic_bytes(self, tmp_path):
        blobs = []
        for name in ("m1", "m2"):
            out = tmp_path / name
            assert run_cli("mc", "--preset", "table1", "--replicates", "2",
                           "--seed", "7", "--out-dir", str(out)) == 0
            blobs.append((out / "summary.json").read_bytes())
        assert blobs[0] == blobs[1]

    def test_custom_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "family": "bernoulli", "thetas": [[3.0]], "u0s": [0.51],
            "ns": [50], "nu_true": 40.0, "replicates": 3}))
        out = tmp_path / "mc"
        rc = run_cli("mc", "--config", str(cfg), "--seed", "1",
                     "--out-dir", str(out))
        assert rc == 0
        doc = json.loads((out / "summary.json").read_text())
        assert len(doc["cells"]) == 1

    def test_invalid_config_schema(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "bernoulli"}))
        rc = run_cli("mc", "--config", str(cfg), "--out-dir", str(tmp_path / "x"))
        assert rc == 3
        assert "config" in capsys.readouterr().err


class TestDensity:
    def test_quadrature_and_orbit_agree(self, tmp_path):
        curves = {}
        for method in ("quadrature", "orbit"):
            out = tmp_path / method
            rc = run_cli("density", "--map", "bernoulli", "--theta", "3",
                         "--nu", "15", "--u0", "0.7853981", "--method", method,
                         "--grid", "21", "--n", "200000", "--out", str(out))
            assert rc == 0
            rows = (out.with_name(method + "_density.csv")).read_text().splitlines()[1:]
            curves[method] = np.array([float(r.split(",")[1]) for r in rows])
        assert np.max(np.abs(curves["quadrature"] - curves["orbit"])) <= 1e-2

    def test_quadrature_unavailable_is_numerical_failure(self, tmp_path, capsys):
        rc = run_cli("density", "--map", "mp", "--theta", "0.75", "--nu", "15",
                     "--u0", "0.5", "--method", "quadrature",
                     "--out", str(tmp_path / "d"))
        assert rc == 4
        assert "invariant density" in capsys.readouterr().err

    def test_single_point_grid(self, tmp_path):
        rc = run_cli("density", "--map", "bernoulli", "--theta", "3",
                     "--nu", "15", "--u0", "0.5", "--grid", "1",
                     "--n", "10000", "--out", str(tmp_path / "d"))
        assert rc == 0
        rows = (tmp_path / "d_density.csv").read_text().splitlines()
        assert len(rows) == 2

    def test_sample_overlay_written(self, tmp_path):
        rc = run_cli("density", "--map", "pwl", "--theta", "0.4", "--nu", "15",
                     "--u0", "0.7853981", "--method", "orbit", "--grid", "11",
                     "--n", "100000", "--sample-size", "5000", "--seed", "3",
                     "--out", str(tmp_path / "d"))
        assert rc == 0
        rows = (tmp_path / "d_sample.csv").read_text().splitlines()
        assert rows[0] == "bin_left,bin_right,density"
        assert len(rows) == 31


class TestCsvIngestion:
    def test_covariates_and_dates(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("date,y,x1,x2\n2001-01,0.5,1.0,2.0\n2001-02,0.6,1.5,2.5\n")
        s = read_series_csv(str(f))
        assert s.y == pytest.approx([0.5, 0.6])
        assert s.X.shape == (2, 2)
        assert s.timestamps == ("2001-01", "2001-02")

    def test_missing_covariate_cell(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1\n0.5,1.0\n0.6,\n")
        with pytest.raises(DataError, match="non-numeric"):
            read_series_csv(str(f))

    def test_ragged_row(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,x1\n0.5,1.0\n0.6\n")
        with pytest.raises(DataError, match="fields"):
            read_series_csv(str(f))


class TestReportSchema:
    def test_validate_rejects_malformed(self):
        with pytest.raises(Exception):
            report.validate({"version": "0.1.0"})

    def test_emit_is_deterministic(self):
        doc = {"version": "x", "model": {"family": "bernoulli", "link_g": "identity",
                                         "link_h": "identity", "p": 0,
                                         "n_covariates": 0},
               "estimates": [], "loglik": 1.0, "aic": 0.0, "bic": 0.0,
               "converged": True, "n_obs": 10, "seed": 0, "timing_seconds": 0.0}
        assert report.emit(doc) == report.emit(json.loads(report.emit(doc)))
