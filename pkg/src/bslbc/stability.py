"""Closed forms and numerical checks for ``||exp(tM)||`` and ``||phi(dt M)^n||``.

Everything here is in the maximum norm. The boundary block ``C`` has the
eigenpairs ``(0, (s_{m+1}, S))`` and ``(-r, (1, 1))``, which makes every
rational function of ``C`` available in closed form.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .linalg import expm, matrix_powers, norm_inf
from .operator import DiscreteOperator, Treatment, check_stability_condition


def _boundary_matrix(grid, x):
    # psi(C) for any rational psi with psi(0) = 1 and psi(-r ...) = x
    S, s1, h = grid.S, grid.nodes[grid.m + 1], grid.h_last
    return np.array([[S * x - s1, s1 * (1.0 - x)],
                     [S * (x - 1.0), S - s1 * x]]) / h


def exp_tC_closed_form(grid, r, t):
    """``exp(tC)`` from the eigen-decomposition of the boundary block."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return _boundary_matrix(grid, np.exp(-r * t))


def _boundary_norm(grid, x):
    return x + (1.0 - x) * 2.0 * grid.S / grid.h_last


def norm_exp_tC(grid, r, t):
    """``||exp(tC)||_inf = e^{-rt} + (1 - e^{-rt}) 2S / h_{m+2}``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return _boundary_norm(grid, np.exp(-r * t))


def theoretical_inclusion(grid, r, t):
    """Lower and upper bound on ``||exp(tM)||_inf`` under the block condition."""
    if t < 0:
        raise ValueError("t must be non-negative")
    e = np.exp(-r * t)
    q = 2.0 * grid.S / grid.h_last
    return e + (1.0 - e) * q, e + (1.0 + 3.0 * e) * q


def phi(z, theta):
    """Stability function of the theta-method."""
    return (1.0 + (1.0 - theta) * z) / (1.0 - theta * z)


def phi_matrix(X, theta, dt):
    """``(I - theta dt X)^{-1} (I + (1 - theta) dt X)``."""
    X = np.asarray(X, dtype=float)
    I = np.eye(X.shape[0])
    return np.linalg.solve(I - theta * dt * X, I + (1.0 - theta) * dt * X)


def phi_power_C_closed_form(grid, r, theta, dt, n):
    return _boundary_matrix(grid, phi(-r * dt, theta) ** n)


def phi_power_norm_C(grid, r, theta, dt, n):
    """``||phi(dt C)^n||_inf = x^n + (1 - x^n) 2S/h_{m+2}``, ``x = phi(-r dt)``."""
    if not 0.5 <= theta <= 1.0:
        raise ValueError("theta must lie in [1/2, 1]")
    if not dt > 0 or n < 0:
        raise ValueError("need dt > 0 and n >= 0")
    return _boundary_norm(grid, phi(-r * dt, theta) ** n)


@dataclass
class Record:
    m: int
    t_or_n: float
    norm: float
    lower: float
    upper: float
    verdict: str
    inside: bool


@dataclass
class StabilityReport:
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    verifiable: bool = True
    block_residual: float = 0.0
    K: float | None = None

    @property
    def all_inside(self):
        return self.verifiable and all(rec.inside for rec in self.records)

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["m", "t_or_n", "norm", "lower", "upper", "verdict"])
            for rec in self.records:
                w.writerow([rec.m, f"{rec.t_or_n:.17g}", f"{rec.norm:.17g}",
                            f"{rec.lower:.17g}", f"{rec.upper:.17g}", rec.verdict])


def _meta(op):
    p = op.params
    return {"scheme": op.scheme.value, "treatment": op.treatment.value, "r": p.r,
            "sigma": p.sigma, "S": p.S, "m": op.m, "grid": op.grid.kind}


def exp_tM_samples(op, t_samples):
    """Yield ``(t, exp(tM))``; integer samples reuse powers of ``exp(M)``."""
    t_samples = [float(t) for t in t_samples]
    M = op.dense()
    ints = [t for t in t_samples if t >= 0 and t == int(t)]
    cache = {}
    if ints:
        E1 = expm(M)
        wanted = {int(t) for t in ints}
        for k, P in enumerate(matrix_powers(E1, max(wanted))):
            if k in wanted:
                cache[k] = P
    for t in t_samples:
        yield t, cache[int(t)] if t in ints else expm(t * M)


def verify_semidiscrete_inclusion(op: DiscreteOperator, t_samples, rtol=1e-8,
                                  block_atol=1e-10) -> StabilityReport:
    """Measure ``||exp(tM)||_inf`` against the two-sided bound.

    Each sample is inside when ``lower (1 - rtol) <= norm <= upper (1 + rtol)``.
    The report also records the largest entry of the ``(2, m)`` lower-left
    block of ``exp(tM)``, which must vanish for LBC1 operators.
    """
    if op.treatment != Treatment.LBC1:
        raise ValueError("the inclusion is stated for LBC1 operators")
    verdict = check_stability_condition(op)
    rep = StabilityReport(meta=_meta(op), verifiable=verdict.holds)
    m, r = op.m, op.params.r
    for t, F in exp_tM_samples(op, t_samples):
        nrm = norm_inf(F)
        lo, hi = theoretical_inclusion(op.grid, r, t)
        inside = lo * (1 - rtol) <= nrm <= hi * (1 + rtol)
        rep.block_residual = max(rep.block_residual, float(np.max(np.abs(F[m:, :m]))))
        rep.records.append(Record(m, t, nrm, lo, hi, str(verdict), inside))
    if rep.block_residual > block_atol:
        rep.verifiable = False
    return rep


def max_norm_sweep(op: DiscreteOperator, t_max=100):
    """``max {||exp(tM)||_inf : t = 0, 1, ..., t_max}``.

    Returns ``inf`` when a power overflows.
    """
    E1 = expm(op.dense())
    best = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for P in matrix_powers(E1, t_max):
            v = norm_inf(P)
            if not np.isfinite(v):
                return np.inf
            best = max(best, v)
    return best


def measure_K(op: DiscreteOperator, theta, dt, N):
    """Empirical ``max_{0<=n<=N} ||phi(dt A)^n||_inf`` for the interior block."""
    R = phi_matrix(op.A, theta, dt)
    return max(norm_inf(P) for P in matrix_powers(R, N))


def verify_discrete_inclusion(op: DiscreteOperator, theta, dt, N, K_estimate=None,
                              rtol=1e-8) -> StabilityReport:
    """Check ``||phi(dt M)^n||_inf`` for ``n = 0..N`` against

    ``x^n + (1 - x^n) 2S/h <= ||phi(dt M)^n|| <= K + 4 (K + 1) S/h``.

    ``K`` defaults to :func:`measure_K` over the same ``n`` range.
    """
    if op.treatment != Treatment.LBC1:
        raise ValueError("the inclusion is stated for LBC1 operators")
    if not 0.5 <= theta <= 1.0:
        raise ValueError("theta must lie in [1/2, 1]")
    verdict = check_stability_condition(op)
    K = measure_K(op, theta, dt, N) if K_estimate is None else float(K_estimate)
    rep = StabilityReport(meta=_meta(op) | {"theta": theta, "dt": dt, "N": N},
                          verifiable=verdict.holds, K=K)
    grid, r, m = op.grid, op.params.r, op.m
    upper = K + 4.0 * (K + 1.0) * grid.S / grid.h_last
    R = phi_matrix(op.dense(), theta, dt)
    for n, P in enumerate(matrix_powers(R, N)):
        nrm = norm_inf(P)
        lo = phi_power_norm_C(grid, r, theta, dt, n)
        inside = lo * (1 - rtol) <= nrm <= upper * (1 + rtol)
        rep.block_residual = max(rep.block_residual, float(np.max(np.abs(P[m:, :m]))))
        rep.records.append(Record(m, n, nrm, lo, upper, str(verdict), inside))
    return rep
