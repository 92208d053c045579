import json
import math

import numpy as np
import pytest

from contactred import cli
from contactred.report import dumps, to_plain
from contactred.runner import RunConfig, parse_checks, parse_mu, report_json, run


def test_parse_mu_exact():
    assert parse_mu("2,1") == (2, 1)
    assert parse_mu(["1/2", "0"]) == (0.5, 0)
    assert parse_mu("1/3")[0].denominator == 3


def test_parse_checks_orders_and_validates():
    assert parse_checks("gs,hypotheses") == ("hypotheses", "gs")
    with pytest.raises(ValueError):
        parse_checks("albert,bogus")


def test_config_invariants():
    with pytest.raises(ValueError):
        RunConfig("E1", n_samples=0)


def test_config_from_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('scenario = "S5-T2"\nn_samples = 30\nseed = 3\n'
                    '[mu]\ncoords = ["2", "1"]\n[checks]\nenabled = ["transversality", "hypotheses"]\n')
    cfg = RunConfig.from_toml(path)
    assert cfg.scenario == "S5-T2" and cfg.n_samples == 30 and cfg.seed == 3
    assert cfg.mu == (2, 1) and cfg.checks == ("hypotheses", "transversality")


def test_mu_length_is_checked():
    with pytest.raises(ValueError):
        run(RunConfig("S5-T2", mu="1", checks="hypotheses"))


def test_run_e1_albert():
    rep = run(RunConfig("E1", mu="1", checks="albert", n_samples=20))
    assert rep.passed and rep.albert.albert_quotient_dim == 1


def test_run_e2_albert_has_witness():
    rep = run(RunConfig("E2", mu="1", checks="albert", n_samples=20))
    assert rep.passed and rep.albert.albert_quotient_dim == 3
    assert rep.witness_residuals["three_torus"] < 1e-10


def test_run_t2_pipeline():
    rep = run(RunConfig("S5-T2", mu="2,1", checks="hypotheses,transversality,reduced_kernel",
                        n_samples=40))
    assert rep.passed and rep.quotient_dim == 3 and rep.quotient_is_contact
    assert rep.transversality_rate == 1.0 and rep.locally_free_rate == 1.0


def test_run_sl2_is_flagged_non_contact():
    rep = run(RunConfig("SL2-bookkeeping", checks="hypotheses,reduced_kernel"))
    assert not rep.passed and rep.quotient_dim == 4 and rep.quotient_is_contact is False
    assert any("even" in f for f in rep.failures)


def test_empty_checks_is_noop():
    rep = run(RunConfig("S5-T2"))
    assert rep.passed and rep.checks == [] and rep.sample_count is None


# -- report serialization ------------------------------------------------------

def test_dumps_floats_and_order():
    text = dumps({"b": 0.1, "a": [1.0, float("nan"), np.float64(1 / 3)], "c": True})
    assert text.index('"b"') < text.index('"a"')
    assert "0.10000000000000001" in text and "null" in text
    data = json.loads(text)
    assert data["a"][2] == 1 / 3 and data["c"] is True


def test_report_round_trip_is_valid_json():
    rep = run(RunConfig("S5-T2", mu="2,1", checks="hypotheses,strata,gs", n_samples=20))
    data = json.loads(report_json(rep))
    assert list(data)[:3] == ["scenario_id", "mu", "n_samples"]
    assert data["strata"][0]["isotropy_label"]["isotropy"] == "trivial"
    assert data["passed"] is True


def test_report_is_deterministic_across_workers():
    a = report_json(run(RunConfig("S5-T2", mu="2,1", checks="transversality,strata",
                                  n_samples=30, seed=7)))
    b = report_json(run(RunConfig("S5-T2", mu="2,1", checks="transversality,strata",
                                  n_samples=30, seed=7, workers=4)))
    assert a == b


# -- command line ----------------------------------------------------------------

def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    assert "SL2-bookkeeping" in capsys.readouterr().out


def test_cli_run_pass_and_report(tmp_path, capsys):
    out = tmp_path / "e1.json"
    assert cli.main(["run", "E1", "--mu", "1", "--checks", "albert", "--samples", "20",
                     "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["albert"]["albert_quotient_dim"] == 1


def test_cli_run_failure_exit_code(tmp_path):
    out = tmp_path / "sl2.json"
    assert cli.main(["run", "SL2-bookkeeping", "--checks", "reduced_kernel",
                     "--out", str(out)]) == 1
    assert json.loads(out.read_text())["passed"] is False


def test_cli_default_report_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["run", "S5-T2", "--checks", ""]) == 0
    assert (tmp_path / "S5-T2.report.json").exists()


def test_cli_usage_errors(tmp_path):
    assert cli.main(["run", "nope"]) == 2
    assert cli.main(["run", "E1", "--checks", "bogus"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    out = tmp_path / "out.json"
    cfg.write_text(f'scenario = "E2"\nn_samples = 20\noutput = "{out}"\n'
                   '[checks]\nenabled = ["gs"]\n')
    assert cli.main(["run", "--config", str(cfg)]) == 0
    assert json.loads(out.read_text())["gs_dims"]["fiber_dim"] == 5


def test_cli_corrupted_catalog(tmp_path, capsys):
    from importlib import resources
    text = resources.files("contactred").joinpath("data/lie_catalog.toml").read_text()
    bad = text.replace('  [0, 1, 2, "1"],\n  [1, 2, 0, "1"],',
                       '  [0, 1, 2, "1"],\n  [0, 1, 0, "1"],\n  [1, 2, 0, "1"],', 1)
    assert bad != text
    path = tmp_path / "bad.toml"
    path.write_text(bad)
    assert cli.main(["check-all", "--only", "3", "--catalog", str(path)]) == 2
    assert "JacobiError" in capsys.readouterr().err
    assert cli.main(["run", "S5-SO3", "--catalog", str(path), "--checks", "hypotheses"]) == 2


def test_cli_check_all_subset_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["check-all", "--only", "1,3,9", "--out", str(a)]) == 0
    assert cli.main(["check-all", "--only", "1,3,9", "--workers", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
