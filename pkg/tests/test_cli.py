import pytest

from rmtcap.cli import cli_main
from rmtcap.report import read_csv

SMALL = ["--D", "400", "--M", "4", "--bs", "20", "--trials", "2"]


def test_estimate(capsys):
    assert cli_main(["estimate", *SMALL, "--beta", "2", "--seed", "42"]) == 0
    out = capsys.readouterr().out
    assert "CDM" in out and "MPM" in out and "%" in out


def test_unknown_flag(capsys):
    assert cli_main(["estimate", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_command():
    assert cli_main([]) == 1


def test_bad_value():
    assert cli_main(["estimate", "--trials", "x"]) == 1
    assert cli_main(["estimate", "--eta", "2"]) == 1


def test_runtime_error():
    assert cli_main(["estimate", "--D", "400", "--M", "4", "--bs", "1", "--users", "0",
                     "--trials", "1", "--seed", "3"]) == 2


def test_users_and_beta_exclusive():
    assert cli_main(["estimate", "--users", "5", "--beta", "2"]) == 1


def test_deterministic_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli_main(["estimate", *SMALL, "--beta", "0.5,2", "--deterministic",
                         "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    assert len(rows) == 2 * 2 * 2 and rows[0]["wall_time_s"] == ""


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nD = 400\nM=4\nbs=20\ntrials=2\nmethods=cdm\nformat=json\n")
    out = tmp_path / "r.json"
    assert cli_main(["estimate", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.read_text().startswith("[")
    cfg.write_text("colour=blue\n")
    assert cli_main(["estimate", "--config", str(cfg)]) == 1


def test_sweep(tmp_path, capsys):
    out, gp = tmp_path / "t.csv", tmp_path / "t.gp"
    assert cli_main(["sweep", "--sizes", "30,60", "--reps", "1", "--timing-trials", "1",
                     "--out", str(out), "--gnuplot", str(gp)]) == 0
    assert len(read_csv(out)) == 4
    assert "fitted exponent" in capsys.readouterr().out
    assert str(out) in gp.read_text()


def test_moments_check(capsys):
    assert cli_main(["moments-check", "--profiles", "2", "--draws", "2000"]) == 0
    assert capsys.readouterr().out.count("ok") == 2


@pytest.mark.parametrize("cmd,flag,value", [("eta-sweep", "--etas", "0,0.004"),
                                            ("moments-sweep", "--orders", "1,3")])
def test_sweep_tables(capsys, cmd, flag, value):
    assert cli_main([cmd, *SMALL, "--beta", "2", flag, value]) == 0
    assert "beta=" in capsys.readouterr().out
