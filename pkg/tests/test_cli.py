import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as Fr

import pytest

from cachelab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bound_csv_golden(capsys):
    code, out, _ = run(capsys, "bound", "--K", "4", "--alpha", "3", "--F", "1")
    assert code == 0
    assert out == (
        "K,alpha,F,t,M,R_LB,R_MAN,ratio\n"
        "4,3,1,0,0,4,4,1\n"
        "4,3,1,1,1,5/3,3/2,10/9\n"
        "4,3,1,2,2,2/3,2/3,1\n"
        "4,3,1,3,3,0,1/4,—\n"
    )


def test_bound_alpha_equals_k(capsys):
    _, out, _ = run(capsys, "bound", "--K", "4", "--alpha", "4", "--F", "4")
    assert all(r["R_LB"] == r["R_MAN"] for r in rows_of(out))


def test_bound_alpha_one(capsys):
    _, out, _ = run(capsys, "bound", "--K", "4", "--alpha", "1", "--F", "1")
    assert [(r["M"], r["R_LB"]) for r in rows_of(out)] == [("0", "4"), ("1", "0")]


def test_bound_decimals_within_tolerance(capsys):
    _, out, _ = run(capsys, "bound", "--K", "7", "--alpha", "4", "--decimals")
    for r in rows_of(out):
        for col in ("M", "R_LB", "R_MAN"):
            assert abs(float(Fr(r[col])) - float(r[col + "_decimal"])) < 1e-12


def test_bound_json_roundtrip(capsys):
    _, out, _ = run(capsys, "bound", "--K", "4", "--alpha", "3", "--format", "json", "--gamma", "1/8")
    doc = json.loads(out)
    assert [Fr(r["R_LB"]) for r in doc["rows"]] == [4, Fr(5, 3), Fr(2, 3), 0]
    assert Fr(doc["point"]["R_LB"]) == Fr(17, 6) == Fr(doc["point"]["LP_value"])


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["bound", "--K", "6", "--alpha", "4", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate(capsys):
    _, out, _ = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "man", "--t", "1")
    doc = json.loads(out)
    assert Fr(doc["worst_case_load"]) == Fr(3, 2) and doc["decodable"] is True
    _, out, _ = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "selfish", "--t", "3")
    assert Fr(json.loads(out)["worst_case_load"]) == 0
    _, out, _ = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "selfish", "--t", "1")
    assert Fr(json.loads(out)["worst_case_load"]) == 2 >= Fr(5, 3)


def test_simulate_gamma_and_profile(capsys):
    _, out, _ = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "man", "--gamma", "1/4")
    assert json.loads(out)["t"] == 1
    code, out, _ = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "profile", "--profile", "1/2,1/2,0,0")
    assert code == 0 and json.loads(out)["M"] == "1/2"


@pytest.mark.parametrize("K, alpha, F", [(4, 3, 1), (3, 2, 2), (2, 1, 1)])
def test_verify_passes(capsys, K, alpha, F):
    code, out, _ = run(capsys, "verify", "--K", str(K), "--alpha", str(alpha), "--F", str(F))
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["ok"] and doc["summary"]["failed"] == 0
    if (K, alpha, F) == (4, 3, 1):
        ten = [r for r in doc["reports"] if r["subject"].startswith("appearances of W_{1,(1, 2, 3),(2,)}")]
        assert ten and ten[0]["brute_value"] == "10" and ten[0]["match"]


def test_verify_reports_skips_over_cap(capsys):
    code, out, _ = run(capsys, "verify", "--K", "4", "--alpha", "3", "--cap-demands", "3", "--cap-mais", "4")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["skipped"]


def test_graph(capsys):
    code, out, _ = run(capsys, "graph", "--K", "4", "--alpha", "3", "--perm", "1,2,3,4")
    assert code == 0 and out.count("label=") == 16
    _, out, _ = run(capsys, "graph", "--K", "4", "--alpha", "1", "--perm", "1,2,3,4")
    assert out.count("label=") == 4 and "->" not in out
    _, out, _ = run(capsys, "graph", "--K", "3", "--alpha", "2", "--F", "2", "--perm", "1,2,3", "--files", "1,1,1")
    assert out.count("label=") == 6
    _, explicit, _ = run(capsys, "graph", "--K", "4", "--alpha", "3", "--demand", "123;234;134;124")
    _, via_perm, _ = run(capsys, "graph", "--K", "4", "--alpha", "3", "--perm", "1,2,3,4")
    assert explicit == via_perm


@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--K", "4", "--alpha", "5"],
        ["bound", "--K", "4", "--alpha", "3", "--format", "dot"],
        ["bound", "--K", "4", "--alpha", "3", "--gamma", "abc"],
        ["graph", "--K", "4", "--alpha", "3", "--demand", "12x;234"],
        ["graph", "--K", "4", "--alpha", "3", "--demand", "234;234;134;124"],
        ["graph", "--K", "4", "--alpha", "3"],
        ["simulate", "--K", "4", "--alpha", "3", "--scheme", "profile", "--profile", "1/2,0,0,0"],
        ["simulate", "--K", "4", "--alpha", "3", "--scheme", "man"],
        ["bound", "--alpha", "3"],
    ],
)
def test_invalid_input_exits_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_cap_exceeded_exits_3(capsys):
    code, _, err = run(capsys, "simulate", "--K", "4", "--alpha", "3", "--scheme", "man", "--t", "1", "--cap-demands", "2")
    assert code == 3 and "9" in err


def test_config_file_and_flag_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("K = 4\nalpha = 3\nF = 1\nformat = json\n")
    code, out, _ = run(capsys, "bound", "--config", str(cfg))
    assert code == 0 and json.loads(out)["alpha"] == 3
    code, out, _ = run(capsys, "bound", "--config", str(cfg), "--alpha", "2")
    assert json.loads(out)["alpha"] == 2
    monkeypatch.setenv("CACHELAB_CONFIG", str(cfg))
    code, out, _ = run(capsys, "bound")
    assert code == 0 and json.loads(out)["K"] == 4


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("K = 4\ncolour = blue\n")
    code, _, err = run(capsys, "bound", "--config", str(cfg), "--alpha", "3")
    assert code == 2 and "colour" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cachelab", "bound", "--K", "4", "--alpha", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "5/3" in proc.stdout
