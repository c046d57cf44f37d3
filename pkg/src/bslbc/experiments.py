"""Parameter sweeps behind the stability plots, convergence plots and the
mixed-scheme fraction table. Every runner returns a list of row dicts and
optionally writes them as CSV."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analytic import CallOption, call_price, payoff_vector
from .grid import build_sinh_grid
from .linalg import expm, matrix_powers, norm_inf
from .operator import (ModelParams, Scheme, Treatment, assemble,
                       check_stability_condition, forward_fraction)
from .stability import theoretical_inclusion
from .timestepper import ThetaConfig, fit_order, solve

ALL_SCHEMES = tuple(Scheme)
ALL_TREATMENTS = tuple(Treatment)

# m values of the convergence study, log-spaced from 1e2 to 1e4
STUDY_M = (100, 129, 167, 215, 278, 359, 464, 599, 774, 1000, 1292, 1668,
            2154, 2783, 3594, 4642, 5995, 7743, 10000)
# reported forward-fallback percentages (Mixed A, Mixed B) at r=0.3, sigma=0.1
FALLBACK_PERCENT = {
    100: (57.0, 58.0), 129: (47.3, 48.8), 167: (34.1, 36.5), 215: (9.8, 11.2),
    278: (7.9, 7.6), 359: (6.4, 6.4), 464: (5.2, 5.2), 599: (4.2, 4.2),
    774: (3.4, 3.4), 1000: (2.7, 2.7), 1292: (2.1, 2.1), 1668: (1.7, 1.7),
    2154: (1.3, 1.3), 2783: (1.0, 1.0), 3594: (0.8, 0.8), 4642: (0.6, 0.6),
    5995: (0.5, 0.5), 7743: (0.4, 0.4), 10000: (0.3, 0.3),
}
STUDY_PAIRS = ((0.1, 0.3), (0.3, 0.1), (0.2, 0.0))


@dataclass(frozen=True)
class ExperimentPreset:
    r: float
    sigma: float
    E: float = 100.0
    c: float = 20.0
    S: float = 400.0
    m_list: tuple = tuple(range(50, 401, 50))
    schemes: tuple = ALL_SCHEMES
    treatments: tuple = ALL_TREATMENTS
    theta: float = 0.5
    N: int = 4000
    T: float = 5.0
    t_max: int = 100
    fit_max_m: int | None = None
    rannacher_substeps: int = 2

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "treatments", tuple(Treatment(t) for t in self.treatments))
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        self.params  # validates r, sigma, E, S, T

    @property
    def params(self):
        return ModelParams(self.r, self.sigma, self.S, self.E, self.T)

    def grid(self, m):
        return build_sinh_grid(self.E, self.c, self.S, m)


def stability_preset(r, sigma, paper_scale=False, **kw):
    """Sinh grid with E=100, c=20, S=400; m up to 400 (desk) or 1000."""
    m_max = 1000 if paper_scale else 400
    kw.setdefault("m_list", tuple(range(50, m_max + 1, 50)))
    return ExperimentPreset(r, sigma, **kw)


def convergence_preset(r, sigma, paper_scale=False, **kw):
    """European call, E=100, T=5, S=2000, Crank-Nicolson with damped start.

    Desk scale stops the m list at 2154 with N=4000 and fits on m <= 1077;
    full scale runs the whole list with N=10^4 and fits on m <= 5000.
    """
    if paper_scale:
        base = dict(m_list=STUDY_M, N=10_000, fit_max_m=5000)
    else:
        base = dict(m_list=tuple(m for m in STUDY_M if m <= 2154), N=4000, fit_max_m=1077)
    base.update(kw)
    return ExperimentPreset(r, sigma, S=2000.0, T=5.0, **base)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (Scheme, Treatment)):
        return v.value
    return "" if v is None else str(v)


def write_csv(rows, path=None):
    """Write row dicts as CSV to ``path``, or return the text when ``path`` is None."""
    if not rows:
        raise ValueError("nothing to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0])
    w.writerow(keys)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in keys])
    if path is None:
        return buf.getvalue()
    with open(path, "w", newline="") as f:
        f.write(buf.getvalue())
    return path


def _map(fn, cases, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, cases))
    return [fn(c) for c in cases]


def _stability_case(case):
    preset, scheme, treatment, m = case
    grid = preset.grid(m)
    op = assemble(grid, preset.params, scheme, treatment)
    ref = 2.0 * grid.S / grid.h_last
    verdict = check_stability_condition(op) if treatment == Treatment.LBC1 else None
    E1 = expm(op.dense())
    best, inside, overflow = 0.0, True, False
    with np.errstate(over="ignore", invalid="ignore"):
        for t, P in enumerate(matrix_powers(E1, preset.t_max)):
            v = norm_inf(P)
            if not np.isfinite(v):
                overflow, best = True, np.inf
                break
            best = max(best, v)
            if verdict is not None and verdict.holds:
                lo, hi = theoretical_inclusion(grid, preset.r, t)
                inside &= lo * (1 - 1e-8) <= v <= hi * (1 + 1e-8)
    return {
        "scheme": scheme, "treatment": treatment, "m": m, "r": preset.r,
        "sigma": preset.sigma, "max_norm": best, "two_S_over_h": ref,
        "ratio": best / ref, "overflow": overflow,
        "verdict": "n/a" if verdict is None else str(verdict),
        "inclusion": (bool(inside) if verdict is not None and verdict.holds else None),
    }


def run_stability(preset: ExperimentPreset, out=None, workers=1):
    """``max_t ||exp(tM)||_inf`` over ``t = 0..t_max`` for every (scheme, treatment, m)."""
    cases = [(preset, s, tr, m) for s in preset.schemes for tr in preset.treatments
             for m in preset.m_list]
    rows = _map(_stability_case, cases, workers)
    if out is not None:
        write_csv(rows, out)
    return rows


def _convergence_case(case):
    preset, scheme, treatment, m = case
    grid = preset.grid(m)
    params = preset.params
    op = assemble(grid, params, scheme, treatment)
    opt = CallOption.from_params(params)
    res = solve(op, payoff_vector(grid, preset.E),
                config=ThetaConfig(preset.theta, preset.N, preset.rannacher_substeps),
                T=preset.T, reference=call_price(grid.unknown_nodes, preset.T, opt))
    verdict = check_stability_condition(op) if treatment == Treatment.LBC1 else "n/a"
    return {"scheme": scheme, "treatment": treatment, "m": m, "r": preset.r,
            "sigma": preset.sigma, "h_last": grid.h_last, "error": res.max_error,
            "verdict": str(verdict)}


def _fit_groups(rows, fit_max_m):
    groups = {}
    for row in rows:
        groups.setdefault((row["scheme"], row["treatment"]), []).append(row)
    for grp in groups.values():
        ms = np.array([row["m"] for row in grp])
        err = np.array([row["error"] for row in grp])
        sel = ms <= (fit_max_m or ms.max())
        order = fit_order(1.0 / ms[sel], err[sel]) if np.count_nonzero(sel) >= 2 else np.nan
        for row in grp:
            row["order"] = order
    return rows


def run_convergence(preset: ExperimentPreset, out=None, workers=1):
    """Max-norm error at ``T`` against the Black-Scholes call and the fitted order.

    The order is the least-squares slope of ``log(error)`` against
    ``log(1/m)`` over ``m <= preset.fit_max_m``.
    """
    cases = [(preset, s, tr, m) for s in preset.schemes for tr in preset.treatments
             for m in preset.m_list]
    rows = _fit_groups(_map(_convergence_case, cases, workers), preset.fit_max_m)
    if out is not None:
        write_csv(rows, out)
    return rows


def fitted_orders(rows):
    """``{(scheme, treatment): order}`` from :func:`run_convergence` rows."""
    return {(row["scheme"], row["treatment"]): row["order"] for row in rows}


def run_fractions(preset: ExperimentPreset, out=None):
    """Percentage of rows where Mixed A / Mixed B fall back to forward."""
    rows = []
    for m in preset.m_list:
        grid = preset.grid(m)
        fa = forward_fraction(grid, preset.params, "A")
        fb = forward_fraction(grid, preset.params, "B")
        rows.append({"m": m, "fraction_a": fa, "fraction_b": fb,
                     "percent_a": f"{100 * fa:.1f}", "percent_b": f"{100 * fb:.1f}"})
    if out is not None:
        write_csv(rows, out)
    return rows


def fractions_preset():
    """r=0.3, sigma=0.1 on the S=2000 sinh grid over the full m list."""
    return ExperimentPreset(0.3, 0.1, S=2000.0, m_list=STUDY_M)


def run_lbc_comparison(preset: ExperimentPreset, out=None, workers=1):
    """Pair LBC1 and LBC2 errors for each scheme and m."""
    both = replace(preset, treatments=(Treatment.LBC1, Treatment.LBC2))
    rows = run_convergence(both, workers=workers)
    by_key = {(r["scheme"], r["treatment"], r["m"]): r for r in rows}
    out_rows = []
    for s in both.schemes:
        for m in both.m_list:
            e1 = by_key[(s, Treatment.LBC1, m)]["error"]
            e2 = by_key[(s, Treatment.LBC2, m)]["error"]
            out_rows.append({"scheme": s, "m": m, "error_lbc1": e1, "error_lbc2": e2,
                             "ratio": e1 / e2})
    if out is not None:
        write_csv(out_rows, out)
    return out_rows
