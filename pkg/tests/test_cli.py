import json
import subprocess
import sys

import pytest

from modpoisson import cli
from modpoisson.errors import InvalidArgument


def test_verify_constants_exit_code(tmp_path, capsys):
    assert cli.main(["verify-constants", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "FAIL" not in out
    csv = (tmp_path / "value.csv").read_text().splitlines()
    assert csv[0] == "name,value,stated_bound,pass"
    assert all(line.endswith(",true") for line in csv[1:])
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema"] == cli.SCHEMA


def test_verify_constants_fails_on_violation(monkeypatch, capsys):
    real = cli.constant_checks

    def broken(domains=None):
        recs = real(domains)
        recs[0]["values"]["pass"] = False
        return recs

    monkeypatch.setattr(cli, "constant_checks", broken)
    assert cli.main(["verify-constants"]) == 1


def test_verify_constants_single_domain():
    report = cli.run(cli.ExperimentSpec("verify-constants", domains=["dedekind_psi"]))
    assert len(report.records) == 1
    assert report.records[0]["values"]["value"] < 1.06


def test_sweep_ratio_csv_and_round_trip(tmp_path):
    spec = cli.ExperimentSpec(
        "sweep", domain="riemann", statistic="omega", s=[1.5, 1.2], x=[2.0], kind="upper_tail", prime_cutoff=10**5, out=str(tmp_path)
    )
    report = cli.run(spec)
    assert [r["inputs"]["s"] for r in report.records] == [1.2, 1.5]
    for r in report.records:
        assert r["status"] == "ok" and r["values"]["ratio"] > 0
        assert set(r["provenance"]) == {"estimate", "oracle"}
    csv = (tmp_path / "ratio.csv").read_text()
    assert csv.splitlines()[0] == "s,ratio,ratio_err"
    again = cli.ExperimentReport.load(tmp_path / "report.json")
    assert cli.emit_plot_data(again, "ratio") == csv
    assert cli.emit_plot_data(again, "ratio") == cli.emit_plot_data(report, "ratio")


def test_be_sweep_csv(tmp_path):
    spec = cli.ExperimentSpec("sweep", target="be", domain="riemann", statistic="omega", s=[1.5], prime_cutoff=10**5, k_max=40, out=str(tmp_path))
    cli.run(spec)
    lines = (tmp_path / "bound_vs_actual.csv").read_text().splitlines()
    assert lines[0] == "s,actual_sup_gap,bound"
    s, gap, bound = map(float, lines[1].split(","))
    assert s == 1.5 and 0 < gap <= bound


def test_unknown_quantity():
    report = cli.run(cli.ExperimentSpec("verify-constants", domains=["riemann"]))
    with pytest.raises(InvalidArgument):
        cli.emit_plot_data(report, "histogram")
    with pytest.raises(InvalidArgument):
        cli.emit_plot_data(report, "ratio")


def test_validation_errors_exit_two(capsys):
    assert cli.main(["sweep", "--domain", "riemann", "--stat", "omega", "--x", "2", "--s", "1.1", "1.2"]) == 2
    err = capsys.readouterr().err
    assert json.loads(err.splitlines()[0])["code"] == "E_INVALID_ARGUMENT"
    assert cli.main(["estimate", "--domain", "riemann", "--s", "0.9", "--x", "2"]) == 2
    assert cli.main(["estimate", "--domain", "nowhere", "--s", "2", "--x", "2"]) == 2


def test_point_errors_are_recorded():
    # y = -2 at s = 1.1 asks for a negative level
    spec = cli.ExperimentSpec("estimate", domain="riemann", statistic="omega", s=[1.1], y=[-2.0, -1.0], kind="lower_tail")
    report = cli.run(spec)
    status = {r["inputs"]["y"]: r["status"] for r in report.records}
    assert status == {-2.0: "error", -1.0: "ok"}
    bad = [r for r in report.records if r["status"] == "error"][0]
    assert bad["code"] == "E_INVALID_ARGUMENT"


def test_config_file_and_overrides(tmp_path, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"domain": "poly_fq(2)", "statistic": "Omega", "s": [2.0], "samples": 5000, "method": "degree_then_uniform"}))
    monkeypatch.setenv(cli.SEED_ENV, "77")
    spec = cli.spec_from_args(["simulate", "--config", str(cfg), "--samples", "3000"])
    assert spec.seed == 77 and spec.samples == 3000 and spec.domain == "poly_fq(2)"
    spec = cli.spec_from_args(["simulate", "--config", str(cfg), "--seed", "5"])
    assert spec.seed == 5
    report = cli.run(spec)
    values = report.records[0]["values"]
    assert values["N"] == 5000 and sum(values["counts"]) == 5000
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "blue"}))
    with pytest.raises(InvalidArgument):
        cli.spec_from_args(["simulate", "--config", str(bad)])


def test_simulate_is_reproducible():
    def once():
        spec = cli.ExperimentSpec("simulate", domain="riemann", statistic="omega", s=[1.5], samples=20000, seed=3, prime_cutoff=10**4)
        return cli.run(spec).records[0]["values"]

    assert once() == once()


def test_compare_command():
    spec = cli.ExperimentSpec("compare", domain="riemann", statistic="omega", s=[1.5], samples=100000, prime_cutoff=10**5, k_max=20)
    rec = cli.run(spec).records[0]
    assert rec["status"] == "ok"
    assert rec["values"]["tv_distance"] < 0.01


def test_oracle_command_records_model_error():
    spec = cli.ExperimentSpec("oracle", domain="riemann", statistic="Omega", s=[2.0], prime_cutoff=10**5, k_max=10)
    rec = cli.run(spec).records[0]
    assert rec["status"] == "ok"
    assert rec["errors"]["model_error"] > 0


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "modpoisson.cli", "verify-constants", "--domains", "riemann"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert out.stdout.count("PASS") == 2
