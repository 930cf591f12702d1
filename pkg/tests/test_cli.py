import json
import math
import subprocess
import sys

import pytest

from cknlab.cli import dumps, main, run


def _json(argv):
    code, text = run(argv)
    return code, (json.loads(text) if text else None)


def test_classify_power():
    code, rep = _json(["classify", "--weight", "power:alpha=1"])
    assert code == 0
    assert rep["schema"] == 1
    assert rep["result"]["kind"] == "P" and rep["result"]["confidence"] == "exact"
    assert rep["config"]["weight"] == "power:alpha=1"


def test_constants_R_pq_is_e():
    code, rep = _json(["constants", "--n", "2", "--p", "2", "--q", "2", "--R", "2"])
    assert code == 0
    assert rep["result"]["R_pq"] == pytest.approx(math.e, rel=1e-15)
    assert rep["config"]["resolved_exponents"]["R"] == 2.0


def test_full_precision_floats():
    _, text = run(["constants", "--n", "3", "--p", "2", "--q", "4"])
    assert "2.8944050182330683" in text


def test_dumps_renders_17_digits():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert json.loads(dumps({"a": [1.0, float("nan")]})) == {"a": [1.0, None]}


def test_usage_errors_exit_1():
    assert run(["nope"])[0] == 1
    assert run(["classify"])[0] == 1
    assert run(["constants", "--n", "3", "--p", "2", "--q", "4", "--bogus"])[0] == 1


def test_validation_errors_exit_2():
    code, rep = _json(["constants", "--n", "3", "--p", "3", "--q", "2"])
    assert code == 2 and rep["error"] == "ValidationError"
    # class P weights need an explicit mu
    code, rep = _json(["ndc", "--weight", "power:alpha=2"])
    assert code == 2 and "--mu" in rep["message"]
    assert run(["classify", "--weight", "bad:alpha=1"])[0] == 2


def test_construction_impossible_exits_4():
    code, rep = _json(["degenerate-demo", "--weight", "power:alpha=2", "--n", "3", "--p", "2",
                       "--q", "3", "--mu", "1"])
    assert code == 4 and rep["error"] == "ConstructionImpossible"


def test_ndc_report():
    code, rep = _json(["ndc", "--weight", "expinv:sign=-,alpha=1", "--mu", "1"])
    assert code == 0
    assert rep["result"]["verdict"] == "degenerating"
    assert rep["result"]["class"] == "P"


def test_profile_csv(tmp_path):
    out = tmp_path / "p.csv"
    code = main(["profile", "--weight", "power:alpha=0.5", "--grid-size", "32", "--format", "csv",
                 "-o", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "rho,phi,H" and len(lines) == 33


def test_csv_unavailable_for_json_only_commands():
    assert run(["constants", "--n", "3", "--p", "2", "--q", "4", "--format", "csv"])[0] == 2


def test_rayleigh_and_substitution_and_lemma21():
    code, rep = _json(["rayleigh", "--mode", "noncritical", "--n", "3", "--p", "2", "--q", "4",
                       "--gamma", "0.5"])
    assert code == 0 and rep["result"]["ratio_to_reference"] >= 1.0
    code, rep = _json(["substitution", "--weight", "expinv:sign=+,alpha=1", "--n", "3", "--p", "2",
                       "--q", "3"])
    assert code == 0 and rep["result"]["lhs_rel_diff"] < 1e-8
    code, rep = _json(["lemma21", "--n", "1", "--p", "2", "--q", "4", "--gamma", "0.3"])
    assert code == 0
    assert rep["result"]["ratio"] == pytest.approx(2 ** 0.5, rel=1e-12)


def test_minimize_is_byte_deterministic(tmp_path):
    argv = ["minimize", "--mode", "noncritical", "--n", "3", "--p", "2", "--q", "3", "--gamma", "0.5",
            "--budget", "1000", "--seed", "7"]
    a, b = run(argv), run(argv)
    assert a == b and a[0] == 0
    dump = tmp_path / "best.csv"
    assert run(argv + ["--dump-csv", str(dump)])[0] == 0
    assert dump.read_text().startswith("z,y,value\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cknlab", "classify", "--weight", "expinv:sign=+"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["kind"] == "Q"
