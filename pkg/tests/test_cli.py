import json
import subprocess
import sys
import time

import pytest

from bpstiefel.cli import main
from bpstiefel.obstruction import ObstructionReport
from bpstiefel.spectral import Presentation


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_present_projective(capsys):
    code, out, _ = run(capsys, "present", "4", "1", "2")
    assert code == 0
    d = json.loads(out)
    assert d["ideal"] == [[1, 4]] and d["gamma_degrees"] == []
    assert Presentation.from_json(d).to_json() == d


def test_present_default_prime_from_env(capsys, monkeypatch):
    monkeypatch.setenv("BPSTIEFEL_PRIME", "3")
    code, out, _ = run(capsys, "present", "9", "4")
    assert code == 0 and json.loads(out)["p"] == 3
    monkeypatch.setenv("BPSTIEFEL_PRIME", "4")
    code, _, err = run(capsys, "present", "9", "4")
    assert code == 2 and "not prime" in err


def test_present_both_agrees(capsys):
    code, out, _ = run(capsys, "present", "8", "3", "2", "--both")
    d = json.loads(out)
    assert code == 0 and d["agree"] and d["first_discrepancy"] is None
    assert d["engine"]["gamma_multipliers"] == d["closed_form"]["gamma_multipliers"]


def test_present_engine_pretty(capsys):
    code, out, _ = run(capsys, "present", "4", "2", "2", "--engine", "--pretty")
    assert code == 0
    assert "x^3: Z/p^2" in out and "deg 7: Z(p)" in out


def test_present_usage_errors(capsys):
    code, _, err = run(capsys, "present", "3", "4")
    assert code == 2 and "k:" in err
    code, _, err = run(capsys, "present", "3", "2", "--engine", "--both")
    assert code == 2 and "--both" in err
    code, _, err = run(capsys, "present", "5", "2", "2", "--xmax", "3")
    assert code == 2 and "--xmax" in err


def test_obstruct(capsys):
    code, out, _ = run(capsys, "obstruct", "10", "10", "6", "5")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "ruled_out"
    fired = [c for c in d["criteria"] if c["fires"]]
    assert fired == [{"name": "bp_adams", "fires": True, "witness": {"s": 3}}]
    assert ObstructionReport.from_json(d).to_json() == d


def test_obstruct_derive_pretty(capsys):
    code, out, _ = run(capsys, "obstruct", "10", "10", "6", "5", "--derive", "--pretty")
    assert code == 0 and "beta = -254*k_3" in out and "unsatisfiable" in out


def test_series_adams_pretty(capsys):
    code, out, _ = run(capsys, "series", "adams:3", "2", "8", "2", "--pretty")
    assert code == 0
    assert out.strip() == "x + v1*x^2 + (13/7)*v2*x^4 + (1093/127)*v3*x^8"


def test_series_kinds(capsys):
    code, out, _ = run(capsys, "series", "log", "2", "4", "2")
    assert json.loads(out)["series"] == "x - (1/2)*v1*x^2 - (1/14)*v2*x^4"
    code, out, _ = run(capsys, "series", "fgl", "2", "2", "2", "--pretty")
    assert out.strip() == "x + y + v1*x*y"
    code, out, _ = run(capsys, "series", "nseries:3", "2", "2", "2", "--pretty")
    assert out.strip() == "3*x + 3*v1*x^2"
    code, out, _ = run(capsys, "series", "exp", "3", "3", "2", "--pretty")
    assert out.strip() == "x + (1/24)*v1*x^3"


def test_series_errors(capsys):
    code, _, err = run(capsys, "series", "adams:2", "2", "8", "2")
    assert code == 1 and "NonUnitParameter" in err
    code, _, err = run(capsys, "series", "bogus", "2")
    assert code == 2 and "kind" in err
    code, _, err = run(capsys, "series", "log", "2", "8", "1")
    assert code == 2 and "jorder" in err


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "4:5", "2:3", "5", "3", "--csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "n,k,m,l,verdict,first_firing_criterion"
    assert "4,2,5,3,ruled_out,divisibility" in lines


def test_scan_bad_range(capsys):
    code, _, err = run(capsys, "scan", "5:1", "1", "1", "1")
    assert code == 2 and "range" in err


def test_out_file(capsys, tmp_path):
    target = tmp_path / "p.json"
    code, out, _ = run(capsys, "present", "8", "3", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["staircase"] == [2, 2, 0]


def test_output_is_byte_stable(capsys):
    first = run(capsys, "scan", "1:6", "1:6", "1:6", "1:6")[1]
    second = run(capsys, "scan", "1:6", "1:6", "1:6", "1:6")[1]
    assert first == second


def test_selfcheck_quick(capsys):
    t = time.perf_counter()
    code, out, _ = run(capsys, "selfcheck", "--quick")
    assert time.perf_counter() - t < 10
    d = json.loads(out)
    assert code == 0 and d["ok"] and len(d["suites"]) == 10


def test_selfcheck_mutation_fails(capsys):
    code, out, _ = run(capsys, "selfcheck", "--quick", "--mutate-transgression", "--pretty")
    assert code == 1
    assert "FAIL engine" in out and "selfcheck FAILED" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bpstiefel", "obstruct", "5", "1", "9", "8"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["criteria"][0]["fires"]
