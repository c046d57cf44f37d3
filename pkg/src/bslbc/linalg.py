"""Maximum norms, tridiagonal solves and the dense matrix exponential."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack


def norm_inf(x):
    """Maximum norm: largest absolute entry (vector) or absolute row sum (matrix)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(np.max(np.abs(x))) if x.size else 0.0
    if x.ndim == 2:
        return float(np.max(np.sum(np.abs(x), axis=1)))
    raise ValueError("norm_inf expects a vector or a matrix")


def log_norm_inf(X):
    """Logarithmic maximum norm ``max_i (x_ii + sum_{j != i} |x_ij|)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("log_norm_inf needs a square matrix")
    d = np.diag(X)
    off = np.sum(np.abs(X), axis=1) - np.abs(d)
    return float(np.max(d + off))


def tridiag_log_norm_inf(lower, diag, upper):
    """:func:`log_norm_inf` of a tridiagonal matrix given by its diagonals."""
    off = np.zeros_like(diag, dtype=float)
    off[1:] += np.abs(lower)
    off[:-1] += np.abs(upper)
    return float(np.max(diag + off))


def tridiag_to_dense(lower, diag, upper):
    n = len(diag)
    A = np.diag(np.asarray(diag, dtype=float))
    if n > 1:
        A[np.arange(1, n), np.arange(n - 1)] = lower
        A[np.arange(n - 1), np.arange(1, n)] = upper
    return A


def tridiag_matvec(lower, diag, upper, x):
    y = diag * x
    y[1:] += lower * x[:-1]
    y[:-1] += upper * x[1:]
    return y


def is_strictly_diagonally_dominant(lower, diag, upper):
    off = np.zeros(len(diag))
    off[1:] += np.abs(lower)
    off[:-1] += np.abs(upper)
    return bool(np.all(np.abs(diag) > off))


def _thomas(a, b, c, d):
    # a: sub (len n-1), b: diag (n), c: super (n-1)
    n = len(b)
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)
    beta = b[0]
    dp[0] = d[0] / beta
    for i in range(1, n):
        cp[i - 1] = c[i - 1] / beta
        beta = b[i] - a[i - 1] * cp[i - 1]
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / beta
    x = dp
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system.

    Uses elimination without pivoting (Thomas) when the matrix is strictly
    diagonally dominant by rows and a dense partially pivoted LU otherwise.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the pivoted factorization meets an exact zero pivot.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if n < 1 or lower.size != n - 1 or upper.size != n - 1 or rhs.shape[0] != n:
        raise ValueError("inconsistent tridiagonal system dimensions")
    if is_strictly_diagonally_dominant(lower, diag, upper):
        return _thomas(lower, diag, upper, rhs.copy())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(tridiag_to_dense(lower, diag, upper), check_finite=True)
    if np.any(np.diag(lu) == 0.0):
        raise np.linalg.LinAlgError("singular tridiagonal system")
    return sla.lu_solve((lu, piv), rhs)


class TridiagonalFactor:
    """Pivoted LU of a tridiagonal matrix, reused across many right-hand sides.

    Backed by LAPACK ``gttrf``/``gttrs`` so every solve costs O(n).
    """

    def __init__(self, lower, diag, upper):
        self.n = len(diag)
        if self.n < 3:
            # the scipy gttrf wrapper mis-sizes its work array for n < 3
            lu = sla.lu_factor(tridiag_to_dense(lower, diag, upper))
            if np.any(np.diag(lu[0]) == 0.0):
                raise np.linalg.LinAlgError("singular tridiagonal matrix")
            self._f = lu
            return
        dl, d, du, du2, ipiv, info = lapack.dgttrf(
            np.array(lower, dtype=float), np.array(diag, dtype=float),
            np.array(upper, dtype=float))
        if info > 0:
            raise np.linalg.LinAlgError(f"singular tridiagonal matrix (pivot {info})")
        if info < 0:
            raise ValueError(f"dgttrf: illegal argument {-info}")
        self._f = (dl, d, du, du2, ipiv)

    def solve(self, rhs):
        if self.n < 3:
            return sla.lu_solve(self._f, np.asarray(rhs, dtype=float))
        dl, d, du, du2, ipiv = self._f
        x, info = lapack.dgttrs(dl, d, du, du2, ipiv, np.asarray(rhs, dtype=float))
        if info != 0:
            raise ValueError(f"dgttrs: illegal argument {-info}")
        return x


# Pade coefficients b_k of the [q/q] approximant, and the 1-norm bounds
# below which degree q meets unit roundoff (Higham 2005).
_PADE = {
    3: (120., 60., 12., 1.),
    5: (30240., 15120., 3360., 420., 30., 1.),
    7: (17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.),
    9: (17643225600., 8821612800., 2075673600., 302702400., 30270240.,
        2162160., 110880., 3960., 90., 1.),
    13: (64764752532480000., 32382376266240000., 7771770303897600.,
         1187353796428800., 129060195264000., 10559470521600.,
         670442572800., 33522128640., 1323241920., 40840800., 960960.,
         16380., 182., 1.),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


def _pade_uv(A, q, I):
    b = _PADE[q]
    A2 = A @ A
    if q == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I)
        return U, V
    powers = [I, A2]
    for _ in range(2, (q + 1) // 2):
        powers.append(powers[-1] @ A2)
    U = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return A @ U, V


def expm(X):
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The degree (3, 5, 7, 9 or 13) is picked from the 1-norm of ``X``; beyond
    the degree-13 threshold ``X`` is scaled by ``2**-s`` and the result
    squared ``s`` times.
    """
    A = np.array(X, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expm needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("expm input has non-finite entries")
    n = A.shape[0]
    I = np.eye(n)
    nrm = np.linalg.norm(A, 1)
    s = 0
    for q in (3, 5, 7, 9):
        if nrm <= _THETA[q]:
            break
    else:
        q = 13
        if nrm > _THETA[13]:
            s = int(np.ceil(np.log2(nrm / _THETA[13])))
            if s > 1000:
                raise OverflowError("matrix norm too large for scaling and squaring")
            A = A / 2.0**s
    U, V = _pade_uv(A, q, I)
    F = np.linalg.solve(V - U, V + U)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for _ in range(s):
                F = F @ F
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    return F


def matrix_powers(X, n_max):
    """Yield ``X**0, X**1, ..., X**n_max`` by repeated right multiplication."""
    X = np.asarray(X, dtype=float)
    P = np.eye(X.shape[0])
    yield P
    for _ in range(n_max):
        P = P @ X
        yield P


def matrix_power_norms(X, n_max):
    """``[||X**n||_inf for n = 0..n_max]``.

    Once a power overflows, that entry and all later ones are ``inf``; callers
    that care inspect ``np.isfinite`` on the result.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    out = np.full(n_max + 1, np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        for n, P in enumerate(matrix_powers(X, n_max)):
            v = norm_inf(P)
            if not np.isfinite(v):
                break
            out[n] = v
    return out
