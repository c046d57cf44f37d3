"""Semidiscrete Black-Scholes operator with the linear boundary condition.

The assembled matrix ``M`` acts on ``(u_1, ..., u_{m+2})``. Rows ``1..m``
carry one of five three-point schemes for ``0.5 sigma^2 s^2 u_ss + r s u_s - r u``;
the last two rows discretize ``u_ss(S) = 0`` with the one-sided difference
``(u_{m+2} - u_{m+1}) / h_{m+2}`` for ``u_s``.

``LBC1`` uses that boundary stencil at both ``s_{m+1}`` and ``s_{m+2}`` which
gives the 2x2 block ``C`` with two equal rows. ``LBC2`` keeps the interior
scheme at ``s_{m+1}`` and only uses the boundary stencil at ``S``.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .grid import Grid
from .linalg import log_norm_inf, tridiag_log_norm_inf, tridiag_matvec, tridiag_to_dense

__all__ = [
    "ModelParams", "Scheme", "Treatment", "DiscreteOperator", "Verdict",
    "coefficients_forward", "coefficients_central_a", "coefficients_central_b",
    "mixed_select", "assemble", "forward_fraction", "check_stability_condition",
    "log_norm_inf",
]


@dataclass(frozen=True)
class ModelParams:
    r: float
    sigma: float
    S: float
    E: float = 100.0
    T: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("interest rate r must be positive")
        if not self.sigma >= 0:
            raise ValueError("volatility must be non-negative")
        if not self.T > 0:
            raise ValueError("maturity T must be positive")
        if not 0 < self.E < self.S:
            raise ValueError("need 0 < E < S")


class Scheme(str, enum.Enum):
    FORWARD = "forward"
    CENTRAL_A = "central_a"
    CENTRAL_B = "central_b"
    MIXED_A = "mixed_a"
    MIXED_B = "mixed_b"


class Treatment(str, enum.Enum):
    LBC1 = "lbc1"
    LBC2 = "lbc2"


# Vectorized coefficient formulas. s: node s_j, h: h_j, hp: h_{j+1}.

def _forward(s, h, hp, r, sig2):
    H = h + hp
    d = sig2 * s * s
    beta = d / (h * H)
    alpha = -r - r * s / hp - d / (h * hp)
    gamma = r * s / hp + d / (hp * H)
    return beta, alpha, gamma


def _central_a(s, h, hp, r, sig2):
    H = h + hp
    d = sig2 * s * s
    beta = -r * s / H + d / (h * H)
    alpha = -r - d / (h * hp) + 0.0 * s
    gamma = r * s / H + d / (hp * H)
    return beta, alpha, gamma


def _central_b(s, h, hp, r, sig2):
    H = h + hp
    d = sig2 * s * s
    beta = -r * s * hp / (h * H) + d / (h * H)
    alpha = -r + r * s * (hp - h) / (h * hp) - d / (h * hp)
    gamma = r * s * h / (hp * H) + d / (hp * H)
    return beta, alpha, gamma


def _central_ok(s, h, hp, r, sig2, variant):
    # Mixed switch: central where 0 < r <= (s_j / width) sigma^2, width
    # being h_j (variant A) or h_{j+1} (variant B). Ties go to central.
    width = h if variant == "A" else hp
    return r <= s / width * sig2


def _stencil_data(grid, j):
    j = np.asarray(j)
    return grid.nodes[j], grid.h[j - 1], grid.h[j]


def _check_index(grid, j):
    if not 1 <= j <= grid.m + 1:
        raise IndexError(f"scheme row j={j} outside 1..{grid.m + 1}")


def coefficients_forward(grid: Grid, params: ModelParams, j: int):
    """``(beta_j, alpha_j, gamma_j)`` with first-order forward advection."""
    _check_index(grid, j)
    b, a, g = _forward(*_stencil_data(grid, j), params.r, params.sigma**2)
    return float(b), float(a), float(g)


def coefficients_central_a(grid: Grid, params: ModelParams, j: int):
    """Coefficients with advection ``(u_{j+1} - u_{j-1}) / H_j``."""
    _check_index(grid, j)
    b, a, g = _central_a(*_stencil_data(grid, j), params.r, params.sigma**2)
    return float(b), float(a), float(g)


def coefficients_central_b(grid: Grid, params: ModelParams, j: int):
    """Coefficients with the second-order three-point advection stencil for
    non-uniform grids."""
    _check_index(grid, j)
    b, a, g = _central_b(*_stencil_data(grid, j), params.r, params.sigma**2)
    return float(b), float(a), float(g)


def mixed_select(grid: Grid, params: ModelParams, j: int, variant: str):
    """Central A/B coefficients where the positivity condition holds at ``j``,
    forward coefficients otherwise."""
    _check_index(grid, j)
    variant = variant.upper()
    if variant not in ("A", "B"):
        raise ValueError("variant must be 'A' or 'B'")
    s, h, hp = _stencil_data(grid, j)
    if _central_ok(s, h, hp, params.r, params.sigma**2, variant):
        f = coefficients_central_a if variant == "A" else coefficients_central_b
    else:
        f = coefficients_forward
    return f(grid, params, j)


def _rows(grid, params, scheme, J):
    """Coefficient arrays for rows j = 1..J and the scheme used per row."""
    j = np.arange(1, J + 1)
    s, h, hp = _stencil_data(grid, j)
    r, sig2 = params.r, params.sigma**2
    fw = _forward(s, h, hp, r, sig2)
    if scheme == Scheme.FORWARD:
        return fw, np.full(J, "forward", dtype=object)
    if scheme == Scheme.CENTRAL_A:
        return _central_a(s, h, hp, r, sig2), np.full(J, "central_a", dtype=object)
    if scheme == Scheme.CENTRAL_B:
        return _central_b(s, h, hp, r, sig2), np.full(J, "central_b", dtype=object)
    variant = "A" if scheme == Scheme.MIXED_A else "B"
    central = (_central_a if variant == "A" else _central_b)(s, h, hp, r, sig2)
    ok = _central_ok(s, h, hp, r, sig2, variant)
    coeffs = tuple(np.where(ok, c, f) for c, f in zip(central, fw))
    labels = np.where(ok, "central_" + variant.lower(), "forward").astype(object)
    return coeffs, labels


class Verdict(NamedTuple):
    holds: bool
    reasons: tuple = ()

    def __str__(self):
        return "holds" if self.holds else "fails(" + ";".join(self.reasons) + ")"


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Tridiagonal ``M`` of size ``m + 2`` plus the Dirichlet hook at ``s = 0``.

    ``lower[i]`` is ``M[i+1, i]`` and ``upper[i]`` is ``M[i, i+1]`` (0-based).
    ``beta1`` never enters ``M``; it couples row 1 to the boundary value
    ``g0(t)`` through :meth:`source`.
    """

    grid: Grid
    params: ModelParams
    scheme: Scheme
    treatment: Treatment
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    beta1: float
    chosen: tuple
    g0: Callable | None = None

    @property
    def n(self):
        return self.diag.size

    @property
    def m(self):
        return self.grid.m

    def dense(self):
        return tridiag_to_dense(self.lower, self.diag, self.upper)

    @property
    def A(self):
        return self.dense()[: self.m, : self.m]

    @property
    def B(self):
        return self.dense()[: self.m, self.m:]

    @property
    def C(self):
        return self.dense()[self.m:, self.m:]

    def interior(self):
        """``(beta_j, alpha_j, gamma_j)`` arrays for ``j = 1..m``; ``beta_1`` included."""
        m = self.m
        beta = np.concatenate(([self.beta1], self.lower[: m - 1]))
        return beta, self.diag[:m].copy(), self.upper[:m].copy()

    def matvec(self, x):
        return tridiag_matvec(self.lower, self.diag, self.upper, np.asarray(x, dtype=float))

    def source(self, t):
        """``b(t)``: zero except ``beta_1 * g0(t)`` in the first entry."""
        b = np.zeros(self.n)
        if self.g0 is not None:
            b[0] = self.beta1 * self.g0(t)
        return b

    def log_norm(self):
        return tridiag_log_norm_inf(self.lower, self.diag, self.upper)

    def to_csv(self, path):
        beta = np.concatenate(([self.beta1], self.lower))
        upper = np.concatenate((self.upper, [0.0]))
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["j", "beta_j", "alpha_j", "gamma_j", "chosen_scheme_at_j"])
            for i in range(self.n):
                w.writerow([i + 1, f"{beta[i]:.17g}", f"{self.diag[i]:.17g}",
                            f"{upper[i]:.17g}", self.chosen[i]])


def assemble(grid: Grid, params: ModelParams, scheme, treatment, g0=None) -> DiscreteOperator:
    """Build ``M`` for one of the five schemes and one boundary treatment.

    Parameters
    ----------
    g0 : callable, optional
        Dirichlet value ``u(0, t)``; ``None`` means homogeneous (European call).
    """
    scheme = Scheme(scheme)
    treatment = Treatment(treatment)
    if grid.S != params.S:
        raise ValueError("grid and parameters disagree on S")
    m = grid.m
    J = m if treatment == Treatment.LBC1 else m + 1
    (beta, alpha, gamma), labels = _rows(grid, params, scheme, J)

    n = m + 2
    lower = np.zeros(n - 1)
    diag = np.zeros(n)
    upper = np.zeros(n - 1)
    diag[:J] = alpha
    upper[:J] = gamma
    lower[: J - 1] = beta[1:]

    r, S, h, s1 = params.r, grid.S, grid.h_last, grid.nodes[m + 1]
    cl, cr = -r * S / h, r * s1 / h
    if treatment == Treatment.LBC1:
        lower[m - 1] = 0.0
        diag[m], upper[m] = cl, cr
    lower[m], diag[m + 1] = cl, cr
    chosen = tuple(labels) + ("lbc",) * (n - J)

    for a in (lower, diag, upper):
        a.setflags(write=False)
    return DiscreteOperator(grid, params, scheme, treatment, lower, diag, upper,
                            float(beta[0]), chosen, g0)


def forward_fraction(grid: Grid, params: ModelParams, variant: str) -> float:
    """Share of rows ``j = 1..m`` where a mixed scheme falls back to forward."""
    variant = variant.upper()
    if variant not in ("A", "B"):
        raise ValueError("variant must be 'A' or 'B'")
    j = np.arange(1, grid.m + 1)
    s, h, hp = _stencil_data(grid, j)
    ok = _central_ok(s, h, hp, params.r, params.sigma**2, variant)
    return float(np.count_nonzero(~ok)) / grid.m


def check_stability_condition(op: DiscreteOperator, rtol=1e-12) -> Verdict:
    """Check the sufficient condition for the two-sided bound on ``||exp(tM)||``.

    Three clauses are tested for the interior block ``A``:

    * ``mu_inf[rI + A] <= 0``,
    * ``r + alpha_m + |beta_m| + |gamma_m| <= 0``,
    * the sign/row-sum pattern on ``rI + A`` that certifies invertibility
      without a rank estimate.

    Comparisons against zero use a slack of ``rtol`` times the row's
    absolute magnitude, since several of these quantities vanish exactly in
    exact arithmetic.
    """
    if op.treatment != Treatment.LBC1:
        raise ValueError("the block condition is only defined for LBC1 operators")
    r = op.params.r
    beta, alpha, gamma = op.interior()
    m = op.m
    a = alpha + r
    scale = rtol * (np.abs(alpha) + np.abs(beta) + np.abs(gamma) + r)
    reasons = []

    # log norm of rI + A: row 1 has no beta inside A, row m keeps gamma_m in B
    off = np.abs(gamma).copy()
    off[m - 1] = 0.0
    off[1:] += np.abs(beta[1:])
    if np.any(a + off > scale):
        reasons.append("log_norm: mu_inf[rI+A] > 0")

    if r + alpha[-1] + abs(beta[-1]) + abs(gamma[-1]) > scale[-1]:
        reasons.append("last_row: r+alpha_m+|beta_m|+|gamma_m| > 0")

    inv = []
    if np.any(beta[1:] < -scale[1:]):
        inv.append("beta_j<0")
    if np.any(gamma[: m - 1] <= 0):
        inv.append("gamma_j<=0")
    if a[0] + gamma[0] > scale[0]:
        inv.append("row1_sum>0")
    mid = slice(1, m - 1)
    if np.any(np.abs(a[mid] + beta[mid] + gamma[mid]) > scale[mid]):
        inv.append("row_sum!=0")
    if not a[-1] + beta[-1] < 0:
        inv.append("rowm_sum>=0")
    if inv:
        reasons.append("invertibility: " + ",".join(inv))
    return Verdict(not reasons, tuple(reasons))
