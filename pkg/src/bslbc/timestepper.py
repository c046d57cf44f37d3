"""Theta-method time integration of ``U' = M U + b(t)``."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import TridiagonalFactor, expm, solve_tridiagonal


@dataclass(frozen=True)
class ThetaConfig:
    """Time-stepping setup.

    With ``rannacher_substeps = k > 0`` the first nominal step is replaced by
    ``k`` implicit Euler substeps of size ``dt / k``; ``k = 0`` disables the
    damped start.
    """

    theta: float = 0.5
    N: int = 100
    rannacher_substeps: int = 2

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if self.N < 1:
            raise ValueError("need at least one time step")
        if self.rannacher_substeps < 0:
            raise ValueError("rannacher_substeps must be >= 0")


@dataclass
class SolveResult:
    U: np.ndarray
    nodes: np.ndarray
    trace: np.ndarray | None = None
    error: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def max_error(self):
        return None if self.error is None else float(np.max(np.abs(self.error)))

    def to_csv(self, path, reference=None):
        ref = reference
        if ref is None and self.error is not None:
            ref = self.U + self.error
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["s_j", "U_j", "analytic_j", "error_j"])
            for i, (s, u) in enumerate(zip(self.nodes, self.U)):
                a = "" if ref is None else f"{ref[i]:.17g}"
                e = "" if ref is None else f"{ref[i] - u:.17g}"
                w.writerow([f"{s:.17g}", f"{u:.17g}", a, e])


def _implicit_diagonals(op, c):
    # I - c M in banded form
    return -c * op.lower, 1.0 - c * op.diag, -c * op.upper


def theta_step(op, U_prev, b_prev, b_next, theta, dt):
    """One step of

    ``U_n = U_{n-1} + (1-theta) dt (M U_{n-1} + b_{n-1}) + theta dt (M U_n + b_n)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    U_prev = np.asarray(U_prev, dtype=float)
    rhs = U_prev + (1.0 - theta) * dt * (op.matvec(U_prev) + b_prev) + theta * dt * b_next
    return solve_tridiagonal(*_implicit_diagonals(op, theta * dt), rhs)


class _Stepper:
    """Constant-step theta stepper with the implicit matrix factored once."""

    def __init__(self, op, theta, dt):
        self.op, self.theta, self.dt = op, theta, dt
        self.lu = TridiagonalFactor(*_implicit_diagonals(op, theta * dt))
        self.has_source = op.g0 is not None

    def __call__(self, U, t_prev):
        op, th, dt = self.op, self.theta, self.dt
        rhs = U + (1.0 - th) * dt * op.matvec(U)
        if self.has_source:
            rhs += (1.0 - th) * dt * op.source(t_prev) + th * dt * op.source(t_prev + dt)
        return self.lu.solve(rhs)


def solve(op, payoff, g0=None, config=ThetaConfig(), T=None, reference=None,
          keep_trace=False) -> SolveResult:
    """Integrate from ``t = 0`` to ``T`` with ``config.N`` nominal steps.

    Parameters
    ----------
    payoff : array_like
        Initial vector on ``s_1 .. s_{m+2}``.
    g0 : callable, optional
        Dirichlet value at ``s = 0``; overrides the one stored on ``op``.
    reference : array_like, optional
        Exact values at ``T``; fills ``SolveResult.error = reference - U``.
    """
    if g0 is not None:
        op = replace(op, g0=g0)
    T = op.params.T if T is None else T
    if not T > 0:
        raise ValueError("T must be positive")
    dt = T / config.N
    U = np.array(payoff, dtype=float)
    if U.shape != (op.n,):
        raise ValueError(f"payoff must have length {op.n}")
    trace = [np.max(np.abs(U))] if keep_trace else None
    tic = time.perf_counter()

    n0, t = 0, 0.0
    k = config.rannacher_substeps
    if k:
        sub = _Stepper(op, 1.0, dt / k)
        for _ in range(k):
            U = sub(U, t)
            t += dt / k
        n0 = 1
        t = dt
        if keep_trace:
            trace.append(np.max(np.abs(U)))
    step = _Stepper(op, config.theta, dt)
    for n in range(n0, config.N):
        U = step(U, n * dt)
        if keep_trace:
            trace.append(np.max(np.abs(U)))

    meta = {"theta": config.theta, "N": config.N, "dt": dt, "T": T,
            "rannacher_substeps": k,
            "rannacher_substep_size": dt / k if k else None,
            "seconds": time.perf_counter() - tic}
    err = None if reference is None else np.asarray(reference, dtype=float) - U
    return SolveResult(U, op.grid.unknown_nodes, None if trace is None else np.array(trace),
                       err, meta)


class DegenerateFit(ValueError):
    """Raised when all errors are at roundoff level and no slope can be fitted."""


def fit_order(h, err, floor=1e-12):
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    if np.all(err < floor):
        raise DegenerateFit("all errors below %g" % floor)
    keep = err >= floor
    if np.count_nonzero(keep) < 2:
        raise DegenerateFit("fewer than two usable error samples")
    return float(np.polyfit(np.log(h[keep]), np.log(err[keep]), 1)[0])


def measure_time_order(op, payoff, theta, N_list, T=None, rannacher_substeps=0):
    """Fitted temporal order of the theta-method on ``op``.

    The reference is the exact semidiscrete solution ``exp(T M) U_0``, so
    only the operator's source must vanish (``g0`` unset). Errors below
    ``1e-10 * ||reference||`` count as roundoff. Returns ``(p, dts, errors)``.
    """
    if len(N_list) < 3:
        raise ValueError("need at least three step counts")
    if op.g0 is not None:
        raise ValueError("exact reference needs a homogeneous boundary source")
    T = op.params.T if T is None else T
    U0 = np.asarray(payoff, dtype=float)
    ref = expm(T * op.dense()) @ U0
    errs, dts = [], []
    for N in N_list:
        res = solve(op, U0, config=ThetaConfig(theta, N, rannacher_substeps), T=T,
                    reference=ref)
        errs.append(res.max_error)
        dts.append(T / N)
    floor = 1e-10 * max(np.max(np.abs(ref)), 1.0)
    return fit_order(dts, errs, floor), np.array(dts), np.array(errs)
