"""Command line behavior: exit codes, output files, config merging.

Everything calls main() in process.  Exit code policy under test: 0 for
success or a passed check, 2 for a failed check or an unsuccessful
genericize run, 1 for usage and configuration errors.
"""

import json

import pytest

from geosieve.cli import main

RESIDUAL_KEYS = {"name", "params", "grid", "s_values", "rows",
                 "max_residual", "fitted_constant", "pass"}


def run(*argv):
    return main(list(argv))


class TestZoo:
    def test_list_prints_catalogue(self, capsys):
        assert run("zoo", "list") == 0
        out = capsys.readouterr().out.splitlines()
        assert "flat_torus" in out
        assert "round_sphere" in out


class TestScan:
    def test_writes_report_files(self, tmp_path, capsys):
        rc = run("scan", "--metric", "zoo:flat_torus", "--base-grid",
                 "3,3,3", "--fiber-grid", "2", "--threshold", "1e-6",
                 "--out", str(tmp_path))
        assert rc == 0
        assert "min_overall=0" in capsys.readouterr().out
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["min_overall"] == 0.0
        assert len(report["planes"]) > 0
        csv = (tmp_path / "report.csv").read_text().splitlines()
        assert len(csv) == 1 + len(report["planes"])

    def test_dump_point_skips_scan(self, capsys):
        rc = run("scan", "--metric", "zoo:flat_torus",
                 "--dump-point", "0.5,0.5,0.5")
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"points", "g", "ginv", "gamma2", "riemann",
                            "cov_riemann"}
        assert doc["g"] == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                            [0.0, 0.0, 1.0]]

    def test_unknown_metric_is_usage_error(self, capsys):
        assert run("scan", "--metric", "zoo:nope") == 1
        assert "error:" in capsys.readouterr().err


class TestCertify:
    def test_wave_check_passes_and_writes_report(self, tmp_path, capsys):
        rc = run("certify", "lemma-local-r", "--K", "100", "--eps", "0.01",
                 "--samples", "20000", "--out", str(tmp_path))
        assert rc == 0
        assert "lemma-local-r: PASS" in capsys.readouterr().out
        doc = json.loads((tmp_path / "lemma-local-r.json").read_text())
        assert set(doc) == RESIDUAL_KEYS
        assert doc["pass"] is True

    def test_field_check_passes(self, capsys):
        rc = run("certify", "lemma-local-m", "--grid", "8,8,8")
        assert rc == 0
        assert "lemma-local-m: PASS" in capsys.readouterr().out

    def test_vacuous_growth_check_fails_with_code_2(self, capsys):
        rc = run("certify", "main-lemma", "--metric",
                 "zoo:random_fourier,seed=7,amp=0.01")
        assert rc == 2
        assert "main-lemma: FAIL" in capsys.readouterr().out

    def test_product_bounds_small_run(self, capsys):
        assert run("certify", "product-bounds", "--trials", "10") == 0
        assert "product-bounds: PASS" in capsys.readouterr().out

    def test_unknown_check_is_usage_error(self, capsys):
        assert run("certify", "nope") == 1
        assert capsys.readouterr().err


class TestGenericize:
    def test_generic_input_succeeds(self, tmp_path, capsys):
        rc = run("genericize", "--metric",
                 "zoo:random_fourier,seed=7,amp=0.01", "--xi", "0.05",
                 "--base-grid", "4,4,4", "--fiber-grid", "8",
                 "--seed", "7", "--out", str(tmp_path))
        assert rc == 0
        assert "succeeded=True" in capsys.readouterr().out
        cert = json.loads((tmp_path / "certificate.json").read_text())
        assert cert["balls"] == []
        assert (tmp_path / "final_metric.json").is_file()

    def test_config_file_supplies_fields_and_flags_override(self, tmp_path,
                                                            capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\n"
                       "metric = zoo:random_fourier,seed=7,amp=0.01\n"
                       "xi = 0.05\n"
                       "base_grid = 3,3,3\n"
                       "fiber_grid = 2\n")
        out = tmp_path / "out"
        rc = run("genericize", "--config", str(cfg), "--fiber-grid", "8",
                 "--out", str(out))
        assert rc == 0
        cert = json.loads((out / "certificate.json").read_text())
        assert cert["scan_grid"] == {"base": [3, 3, 3], "fiber": 8}

    def test_missing_budget_is_usage_error(self, capsys):
        rc = run("genericize", "--metric", "zoo:flat_torus")
        assert rc == 1
        assert "xi" in capsys.readouterr().err

    def test_malformed_config_line_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("metric zoo:flat_torus\n")
        assert run("genericize", "--config", str(cfg)) == 1
        assert "bad.cfg:1" in capsys.readouterr().err


class TestDistance:
    def test_same_metric_prints_zero(self, capsys):
        rc = run("distance", "--g1", "zoo:flat_torus", "--g2",
                 "zoo:flat_torus", "--q", "3", "--grid", "4,4,4")
        assert rc == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_different_metrics_print_positive(self, capsys):
        rc = run("distance", "--g1", "zoo:flat_torus", "--g2",
                 "zoo:random_fourier,seed=7,amp=0.01", "--q", "0",
                 "--grid", "4,4,4")
        assert rc == 0
        assert float(capsys.readouterr().out) > 0.0
