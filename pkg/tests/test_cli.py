import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cohomone import curvature
from cohomone.cli import TRACE_COLUMNS, main
from cohomone.metricmodel import load_profile


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_engine_passes(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-engine", "-o", str(tmp_path / "v.json"))
    assert code == 0
    assert out.count("PASS") == 4
    doc = json.loads((tmp_path / "v.json").read_text())
    assert doc["passed"] and len(doc["suites"]) == 4


def test_verify_engine_suite_filter(capsys):
    code, out, _ = run(capsys, "verify-engine", "--suite", "brackets", "--suite", "sphere")
    assert code == 0
    lines = out.strip().splitlines()
    assert [ln.split()[1].rstrip(":") for ln in lines] == ["brackets", "sphere"]


def test_verify_engine_catches_wrong_gauss_sign(capsys, monkeypatch):
    def flipped(diagram, M, a, b, c, d, hom=None):
        hom = hom or curvature.HomogeneousCurvature(diagram, M)
        s = lambda u, v: curvature.second_fundamental_form(M, u, v)  # noqa: E731
        return hom.tensor(a, b, c, d) - s(a, c) * s(b, d) + s(b, c) * s(a, d)

    monkeypatch.setattr(curvature, "ambient_tensor", flipped)
    code, out, _ = run(capsys, "verify-engine", "--suite", "sphere")
    assert code == 1 and out.startswith("FAIL sphere")


def test_verify_engine_catches_wrong_radial_term(capsys, monkeypatch):
    def wrong(M):
        K = -(0.5 * M.G2 + 0.25 * M.G1 @ M.Ginv @ M.G1)
        return 0.5 * (K + K.T)

    monkeypatch.setattr(curvature, "radial_operator", wrong)
    code, out, _ = run(capsys, "verify-engine", "--suite", "sphere")
    assert code == 1 and "FAIL" in out


def test_certify_random_finds_witness(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "certify", "--random", "-n", "4", "-d", "3", "--seed", "1", "-o", str(path))
    assert code == 2
    doc = json.loads(path.read_text())
    assert doc["verdict"] == "WITNESS"
    assert doc["certificate"]["value"] < 0
    assert out.startswith("WITNESS")


@pytest.mark.parametrize("preset,n", [("round", 4), ("stiefel", 5)])
def test_certify_presets_exit_zero(capsys, preset, n):
    code, out, _ = run(capsys, "certify", "--preset", preset, "-n", str(n))
    assert code == 0
    assert json.loads(out)["verdict"] == "NONE"


def test_certify_reports_are_byte_identical(capsys, tmp_path):
    args = ["certify", "--random", "-n", "5", "-d", "4", "--seed", "7", "-o", str(tmp_path / "a.json")]
    run(capsys, *args)
    first = (tmp_path / "a.json").read_bytes()
    run(capsys, *args)
    assert (tmp_path / "a.json").read_bytes() == first


def test_preset_then_certify(capsys, tmp_path):
    path = tmp_path / "round.json"
    assert run(capsys, "preset", "round", "-n", "4", "-o", str(path))[0] == 0
    p = load_profile(path)
    assert p.n == 4
    code, out, _ = run(capsys, "certify", "--profile", str(path))
    assert code == 0 and json.loads(out)["verdict"] == "NONE"


def test_class_one_327(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "class-one", "-l", "3", "-m", "2", "-N", "7", "-o", str(path))
    assert code == 0
    assert "k = 5" in out and "CONTRADICTION" in out
    doc = json.loads(path.read_text())
    assert doc["k"] == 5 and doc["conditions"]["all_pass"]


def test_class_one_hypothesis_failure(capsys):
    code, out, _ = run(capsys, "class-one", "-l", "3", "-m", "1", "-N", "5")
    assert code == 3
    assert "(b) FAIL" in out


def test_trace_csv(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "trace", "--random", "-n", "4", "-d", "3", "--grid", "50", "-o", str(path))
    assert code == 0
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == 51
    ts = [float(r[0]) for r in rows[1:]]
    assert ts[0] == 0.0 and np.all(np.diff(ts) > 0)
    assert float(rows[-1][1]) == pytest.approx(1.0, abs=1e-12)
    # envelopes only appear near t = 0
    assert rows[1][7] == "" and rows[-1][7] == ""
    assert any(r[7] for r in rows[2:10])


def test_certify_writes_trace(capsys, tmp_path):
    path = tmp_path / "t.csv"
    run(capsys, "certify", "--preset", "round", "-n", "4", "--trace", str(path))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    secs = [float(r[3]) for r in rows[2:-1]]
    assert all(math.isclose(s, 1.0, abs_tol=1e-6) for s in secs)


def test_malformed_profile(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 4,\n "d": 3,\n "L": }')
    code, _, err = run(capsys, "certify", "--profile", str(bad))
    assert code == 1
    assert "line 3" in err


def test_missing_profile_file(capsys, tmp_path):
    code, _, err = run(capsys, "certify", "--profile", str(tmp_path / "nope.json"))
    assert code == 1 and "error" in err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["certify", "--grid", "many"])
    assert exc.value.code == 1


def test_profile_source_required(capsys):
    code, _, err = run(capsys, "certify", "-n", "4")
    assert code == 1 and "exactly one" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cohomone", "verify-engine", "--suite", "brackets"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("PASS brackets")
