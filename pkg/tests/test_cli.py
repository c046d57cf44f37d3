import csv
import io
import subprocess
import sys

import pytest

from bslbc import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_fractions_command(capsys):
    code, out = _run(capsys, "fractions", "--m-list", "100,1000")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["percent_a"], r["percent_b"]) for r in rows] == [("57.0", "58.0"), ("2.7", "2.7")]


def test_stability_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _ = _run(capsys, "stability", "--m-list", "50", "--scheme", "forward",
                   "--treatment", "lbc1", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["verdict"] == "holds"
    assert 0.9 < float(rows[0]["ratio"]) < 1.1


def test_convergence_and_compare(capsys):
    code, out = _run(capsys, "convergence", "--m-list", "100,129", "--scheme", "central_a",
                     "--treatment", "lbc1", "--steps", "100")
    assert code == 0 and len(out.splitlines()) == 3
    code, out = _run(capsys, "lbc-compare", "--m-list", "100", "--scheme", "forward",
                     "--steps", "100")
    row = next(csv.DictReader(io.StringIO(out)))
    assert 0.5 <= float(row["ratio"]) <= 2.0


def test_price_command(capsys):
    code, out = _run(capsys, "price", "--m-list", "200", "--steps", "200", "--S", "400")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 202
    assert max(abs(float(r["error_j"])) for r in rows) < 0.05


def test_bad_scheme_rejected(capsys):
    with pytest.raises(SystemExit):
        cli.main(["stability", "--scheme", "upwind"])


def test_verify_exit_code_reflects_checks(monkeypatch, capsys):
    from bslbc import acceptance

    ok = acceptance.Check(1, "a", True, "")
    bad = acceptance.Check(2, "b", False, "")
    monkeypatch.setattr(acceptance, "FAST_CHECKS", (lambda: ok,))
    assert cli.main(["verify", "--fast"]) == 0
    monkeypatch.setattr(acceptance, "FAST_CHECKS", (lambda: ok, lambda: bad))
    assert cli.main(["verify", "--fast"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL]  2 b" in out and "[PASS]  1 a" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bslbc", "fractions", "--m-list", "215"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1].endswith(",9.8,11.2")
