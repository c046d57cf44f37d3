import csv
import io

import numpy as np
import pytest

from bslbc.experiments import (STUDY_M, FALLBACK_PERCENT, ExperimentPreset, convergence_preset,
                               fitted_orders, fractions_preset, run_convergence, run_fractions,
                               run_lbc_comparison, run_stability, stability_preset, write_csv)
from bslbc.operator import Scheme, Treatment


def _by(rows, **kw):
    return [r for r in rows if all(r[k] == v for k, v in kw.items())]


def test_presets():
    p = stability_preset(0.1, 0.3)
    assert p.m_list == tuple(range(50, 401, 50)) and p.S == 400.0 and p.c == 20.0
    assert stability_preset(0.1, 0.3, paper_scale=True).m_list[-1] == 1000
    c = convergence_preset(0.1, 0.3)
    assert c.m_list[-1] == 2154 and c.N == 4000 and c.T == 5.0 and c.S == 2000.0
    assert convergence_preset(0.1, 0.3, paper_scale=True).m_list == STUDY_M
    assert len(STUDY_M) == 19
    with pytest.raises(ValueError):
        ExperimentPreset(0.1, 0.3, schemes=("upwind",))
    with pytest.raises(ValueError):
        ExperimentPreset(-0.1, 0.3)


def test_stability_rows_track_two_S_over_h():
    rows = run_stability(stability_preset(0.1, 0.3, m_list=(100, 200, 400), treatments=("lbc1",),
                                          schemes=("forward", "mixed_a", "mixed_b")))
    assert len(rows) == 9
    for r in rows:
        assert 0.9 <= r["ratio"] <= 1.1
        assert r["inclusion"] is True and not r["overflow"]


def test_stability_rows_carry_verdict():
    rows = run_stability(stability_preset(0.2, 0.0, m_list=(50,), t_max=10))
    for r in rows:
        if r["treatment"] == Treatment.LBC2:
            assert r["verdict"] == "n/a" and r["inclusion"] is None
        elif r["scheme"] in (Scheme.CENTRAL_A, Scheme.CENTRAL_B):
            assert r["verdict"].startswith("fails") and r["inclusion"] is None
        else:
            assert r["verdict"] == "holds"


@pytest.mark.parametrize("scheme", list(Scheme))
def test_lbc2_bounded_uniformly_in_m(scheme):
    rows = run_stability(stability_preset(0.1, 0.3, m_list=(100, 400), schemes=(scheme,),
                                          treatments=("lbc2",)))
    v100, v400 = (r["max_norm"] for r in rows)
    assert abs(v400 / v100 - 1.0) <= 0.05


def test_lbc2_central_growth_without_volatility():
    rows = run_stability(stability_preset(0.2, 0.0, m_list=(100, 200),
                                          schemes=("central_a", "central_b"), treatments=("lbc2",)))
    a100, a200 = (r["max_norm"] for r in _by(rows, scheme=Scheme.CENTRAL_A))
    assert abs(a200 / a100 - 3.9) <= 0.5
    b100, b200 = (r["max_norm"] for r in _by(rows, scheme=Scheme.CENTRAL_B))
    assert 3.0 < b200 / b100 < 4.5


def test_fractions_table_values():
    rows = run_fractions(ExperimentPreset(0.3, 0.1, S=2000.0, m_list=(100, 215, 10000)))
    for r in rows:
        assert (float(r["percent_a"]), float(r["percent_b"])) == FALLBACK_PERCENT[r["m"]]
    assert fractions_preset().m_list == STUDY_M


def test_fractions_full_table():
    rows = run_fractions(fractions_preset())
    got = {r["m"]: (float(r["percent_a"]), float(r["percent_b"])) for r in rows}
    assert got == FALLBACK_PERCENT


def _small_convergence(**kw):
    base = dict(m_list=(100, 129, 167, 215), N=400, fit_max_m=None)
    base.update(kw)
    return convergence_preset(0.1, 0.3, **base)


def test_convergence_rows_and_order():
    rows = run_convergence(_small_convergence(schemes=("central_a",), treatments=("lbc1",)))
    assert [r["m"] for r in rows] == [100, 129, 167, 215]
    assert all(r["error"] > 0 for r in rows)
    errs = [r["error"] for r in rows]
    assert errs == sorted(errs, reverse=True)
    p = fitted_orders(rows)[(Scheme.CENTRAL_A, Treatment.LBC1)]
    assert 1.6 < p < 2.4
    assert set(rows[0]) >= {"scheme", "treatment", "m", "error", "order", "verdict"}


def test_lbc_comparison_central_a_464():
    rows = run_lbc_comparison(convergence_preset(0.1, 0.3, m_list=(464,), schemes=("central_a",)))
    assert 0.5 <= rows[0]["ratio"] <= 2.0


def test_lbc_comparison_forward_any_m():
    rows = run_lbc_comparison(_small_convergence(schemes=("forward",)))
    assert all(0.5 <= r["ratio"] <= 2.0 for r in rows)


def test_csv_deterministic_and_17_digits(tmp_path):
    pre = _small_convergence(m_list=(100, 129), schemes=("forward", "mixed_b"))
    a = run_convergence(pre, out=tmp_path / "a.csv")
    run_convergence(pre, out=tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = list(csv.DictReader(io.StringIO((tmp_path / "a.csv").read_text())))
    assert len(rows) == len(a) == 8
    assert float(rows[0]["error"]) == a[0]["error"]
    assert rows[0]["scheme"] == "forward" and rows[0]["treatment"] == "lbc1"


def test_worker_pool_matches_serial():
    pre = stability_preset(0.3, 0.1, m_list=(50, 100), t_max=20, schemes=("forward",))
    assert write_csv(run_stability(pre, workers=2)) == write_csv(run_stability(pre))


def test_write_csv_formats():
    text = write_csv([{"a": 0.1, "b": True, "c": None, "d": Scheme.FORWARD, "e": np.float64(2)}])
    assert text == "a,b,c,d,e\n0.10000000000000001,true,,forward,2\n"
    with pytest.raises(ValueError):
        write_csv([])
