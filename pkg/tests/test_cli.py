import csv
import io
import json

import pytest

from socialhc.cli import GENERATE_COLUMNS, MH_COLUMNS, main
from socialhc.config import DEFAULTS, load_config, merge, parse_values
from socialhc.errors import ConfigurationError
from socialhc.harness import FIG8_COLUMNS, HC_COLUMNS, SWEEP_COLUMNS


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO("".join(l for l in text.splitlines(True)
                                                   if not l.startswith("#")))))


def test_generate_stdout(capsys):
    code, out, _ = _run(capsys, "generate", "--n", "32", "--gamma", "1", "--seed", "4")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == list(GENERATE_COLUMNS)
    assert len(rows) == 32
    assert all(r["destination_id"] != "" for r in rows)


def test_generate_files(capsys, tmp_path):
    prefix = tmp_path / "run"
    code, _, err = _run(capsys, "generate", "--n", "16", "--out", str(prefix))
    assert code == 0 and "wrote" in err
    for suffix in (".nodes.csv", ".json", ".social.csv"):
        assert (tmp_path / f"run{suffix}").exists()


def test_simulate_mh(capsys):
    code, out, _ = _run(capsys, "simulate-mh", "--n", "256", "--gamma", "0", "--seed", "1")
    assert code == 0
    (row,) = _rows(out)
    assert list(row) == list(MH_COLUMNS)
    assert float(row["throughput"]) > 0 and float(row["delay_hops"]) >= 1


def test_simulate_hc(capsys):
    code, out, _ = _run(capsys, "simulate-hc", "--n", "64", "--gamma", "2.5", "--subnets", "4",
                        "--trials", "2", "--side-length", "100")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == list(HC_COLUMNS)
    assert [r["slot"] for r in rows] == ["0", "1", "2", "3", "total"]


def test_analytic_table(capsys):
    code, out, _ = _run(capsys, "analytic", "--gamma", "2.5", "--alpha", "3")
    assert code == 0
    assert "# dense:" in out and "# extended: crossover" in out
    rows = _rows(out)
    assert {(r["protocol"], r["mode"]) for r in rows} == {
        ("MH", "dense"), ("HC", "dense"), ("MH", "extended"), ("HC", "extended")}


def test_analytic_frontier_json(capsys):
    code, out, _ = _run(capsys, "analytic", "--mode", "dense", "--gamma", "1", "--frontier",
                        "--grid", "5", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 10
    assert isinstance(data[0]["throughput_exponent"], float)


def test_sweep(capsys, tmp_path):
    out_file = tmp_path / "sweep.csv"
    code, _, _ = _run(capsys, "sweep", "--variable", "gamma", "--values", "0,2.5", "--n", "128",
                      "--trials", "2", "--out", str(out_file))
    assert code == 0
    rows = _rows(out_file.read_text())
    assert list(rows[0]) == list(SWEEP_COLUMNS) and len(rows) == 4
    assert {r["status"] for r in rows} == {"ok"}


def test_fig8(capsys):
    code, out, _ = _run(capsys, "fig8", "--alphas", "3", "--gammas", "2,2.5", "--seeds", "2",
                        "--trials", "2", "--n", "64")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == list(FIG8_COLUMNS) and len(rows) == 2


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[network]\nn = 64\nseed = 9\n[social]\ngamma = 4\n[sweep]\nvalues = 1,2\n")
    loaded = load_config(cfg)
    assert loaded["n"] == 64 and loaded["gamma"] == 4.0 and loaded["values"] == (1, 2)
    code, out, _ = _run(capsys, "simulate-mh", "--config", str(cfg), "--n", "128")
    assert code == 0
    (row,) = _rows(out)
    assert row["n"] == "128" and row["seed"] == "9" and row["gamma"] == "4.0"


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[network]\ncolour = red\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    bad.write_text("[radio]\nn = 3\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    bad.write_text("[network]\nn = many\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.ini")
    with pytest.raises(ConfigurationError):
        parse_values("1,x")
    assert parse_values("1, 2.5,1e3") == (1, 2.5, 1000.0)
    assert merge(DEFAULTS, {"n": None, "q": 3})["n"] == DEFAULTS["n"]


def test_errors_give_nonzero_exit(capsys, tmp_path):
    code, _, err = _run(capsys, "simulate-mh", "--n", "256", "--cell-area", "1e-6")
    assert code == 2 and "error" in err
    code, _, err = _run(capsys, "simulate-mh", "--n", "0")
    assert code == 2
    code, _, err = _run(capsys, "sweep", "--n", "64")
    assert code == 2 and "values" in err
    code, _, _ = _run(capsys, "generate", "--n", "8", "--config", str(tmp_path / "nope.ini"))
    assert code == 2
