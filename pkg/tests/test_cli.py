import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from padicgap import cli
from padicgap.pipeline import GapCertificate, PeriodicWitness

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def run(*argv):
    return cli.main([str(a) for a in argv])


def load(path):
    return json.loads(Path(path).read_text())


def test_analyze_diagonal_gives_witness(tmp_path):
    out = tmp_path / "w.json"
    assert run("analyze", INSTANCES / "diagonal.json", "-o", out) == 0
    doc = load(out)
    assert doc["type"] == "witness" and doc["validated"]
    assert (doc["ell1"], doc["k"]) == (0, 3)
    w = cli.from_document(doc)
    assert isinstance(w, PeriodicWitness)


def test_analyze_shifted_diagonal_round_trip(tmp_path):
    out = tmp_path / "c.json"
    assert run("analyze", INSTANCES / "shifted_diagonal.json", "-o", out) == 0
    doc = load(out)
    cli.validate(doc, "certificate")
    cert = cli.from_document(doc)
    assert isinstance(cert, GapCertificate) and cert.all_zeros() == []
    assert cli.dumps(cli.to_document(cert)) == out.read_text()


def test_gapcheck_fresh_certificate_passes(tmp_path, capsys):
    out = tmp_path / "c.json"
    run("analyze", INSTANCES / "orbit_point.json", "-o", out)
    assert cli.from_document(load(out)).all_zeros() == [2]
    capsys.readouterr()
    assert run("gapcheck", out) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_gapcheck_injected_zero_fails(tmp_path, capsys):
    out = tmp_path / "c.json"
    run("analyze", INSTANCES / "orbit_point.json", "-o", out)
    cert = cli.from_document(load(out))
    off = cert.classes[0].offset
    # two adjacent zeros past the threshold break the gap
    m = max(cert.threshold, 1)
    capsys.readouterr()
    code = run("gapcheck", out, "--inject", f"{off}:{m}", "--inject", f"{off}:{m + 1}")
    text = capsys.readouterr().out
    assert code == cli.EXIT_VERIFY
    assert f", {m}, {m + 1})" in text and text.strip().endswith("FAIL")


def test_gapcheck_empty_certificate_is_vacuous(tmp_path, capsys):
    out = tmp_path / "c.json"
    run("analyze", INSTANCES / "shifted_diagonal.json", "-o", out)
    assert run("gapcheck", out) == 0


def test_manifest_replay(tmp_path):
    out, man = tmp_path / "c.json", tmp_path / "m.json"
    assert run("analyze", INSTANCES / "shifted_diagonal.json", "--n-max", 80,
               "-o", out, "--manifest", man) == 0
    again = tmp_path / "again.json"
    assert run("analyze", "--seed-manifest", man, "-o", again) == 0
    assert again.read_text() == out.read_text()
    doc = load(man)
    doc["outcome"]["digest"] = "0" * 64
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert run("analyze", "--seed-manifest", tmp_path / "bad.json", "-o", again) == cli.EXIT_VERIFY


def test_curve_mode(tmp_path):
    out = tmp_path / "c.json"
    assert run("analyze", INSTANCES / "curve.json", "-o", out) == 0
    doc = load(out)
    assert doc["kind"] == "curve" and doc["C"]["base"] == "9/2"
    assert run("gapcheck", out) == 0


def test_counterexample_command(tmp_path):
    out = tmp_path / "s.json"
    assert run("counterexample", 2, 1, 2, "-o", out) == 0
    doc = load(out)
    assert doc["n"] == [1, 3, 11]
    assert run("counterexample", 2, 1, 0, "-o", out) == 0
    assert load(out)["n"] == [1]
    assert run("counterexample", 4, 1, 1, "-o", out) == cli.EXIT_PARSE
    assert run("counterexample", 2, 1, 8, "--bit-budget", 4096, "-o", out) == cli.EXIT_BUDGET


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    doc = load(INSTANCES / "shifted_diagonal.json")
    doc["variety"][0]["terms"][0][1] = [2, 0]
    bad.write_text(json.dumps(doc))
    assert run("analyze", bad) == cli.EXIT_PARSE
    bad.write_text("{not json")
    assert run("analyze", bad) == cli.EXIT_PARSE
    assert run("analyze", INSTANCES / "shifted_diagonal.json", "--prime-range", "24:28") == cli.EXIT_NO_PRIME
    assert run("analyze", INSTANCES / "shifted_diagonal.json", "--precision", 3, "--degree", 2) == cli.EXIT_PRECISION
    # the curve case refuses two quasiperiodic coordinates
    assert run("analyze", INSTANCES / "shifted_diagonal.json", "--mode", "curve") == cli.EXIT_PARSE


def test_parse_error_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    doc = load(INSTANCES / "shifted_diagonal.json")
    doc["point"][1] = "1/0"
    bad.write_text(json.dumps(doc))
    assert run("analyze", bad) == cli.EXIT_PARSE
    assert "point/1" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    out = subprocess.run([sys.executable, "-m", "padicgap", "counterexample", "3", "1", "1"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0 and json.loads(out.stdout)["n"] == [1, 4]
