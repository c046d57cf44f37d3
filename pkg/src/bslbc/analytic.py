"""European call oracle and spatial truncation errors.

Time ``t`` is time to maturity throughout, matching the forward-time form
``u_t = 0.5 sigma^2 s^2 u_ss + r s u_s - r u`` with ``u(s, 0)`` the payoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class CallOption:
    E: float
    r: float
    sigma: float
    T: float = 1.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("strike must be positive")

    @classmethod
    def from_params(cls, params):
        return cls(params.E, params.r, params.sigma, params.T)


def norm_cdf(x):
    return ndtr(x)


def _npdf(x):
    return np.exp(-0.5 * x * x) / _SQRT2PI


def _d12(s, t, opt):
    vol = opt.sigma * np.sqrt(t)
    with np.errstate(divide="ignore"):
        d1 = (np.log(s / opt.E) + (opt.r + 0.5 * opt.sigma**2) * t) / vol
    return d1, d1 - vol


def payoff_vector(grid, E):
    """``max(0, s_j - E)`` on the unknown nodes ``s_1 .. s_{m+2}``."""
    return np.maximum(0.0, grid.unknown_nodes - E)


def put_part(s, t, opt):
    """``u(s, t) - (s - E e^{-rt})``: the call minus its linear asymptote.

    By put-call parity this is the put price. It decays to zero for large
    ``s`` without cancellation, unlike the call itself.
    """
    s = np.asarray(s, dtype=float)
    disc = opt.E * np.exp(-opt.r * t)
    if t == 0 or opt.sigma == 0:
        return np.maximum(0.0, (opt.E if t == 0 else disc) - s)
    d1, d2 = _d12(s, t, opt)
    return disc * ndtr(-d2) - s * ndtr(-d1)


def call_price(s, t, opt):
    """Black-Scholes value of the European call at asset price ``s``."""
    s = np.asarray(s, dtype=float)
    if t < 0 or np.any(s < 0):
        raise ValueError("need s >= 0 and t >= 0")
    if t == 0:
        return np.maximum(0.0, s - opt.E)
    disc = opt.E * np.exp(-opt.r * t)
    if opt.sigma == 0:
        return np.maximum(0.0, s - disc)
    d1, d2 = _d12(s, t, opt)
    return s * ndtr(d1) - disc * ndtr(d2)


def put_part_time_derivative(s, t, opt):
    s = np.asarray(s, dtype=float)
    rdisc = opt.r * opt.E * np.exp(-opt.r * t)
    if opt.sigma == 0:
        return np.where(s < opt.E * np.exp(-opt.r * t), -rdisc, 0.0)
    d1, d2 = _d12(s, t, opt)
    return s * opt.sigma * _npdf(d1) / (2.0 * np.sqrt(t)) - rdisc * ndtr(-d2)


def call_price_time_derivative(s, t, opt):
    """``du/dt`` (time to maturity) of the call; requires ``t > 0``."""
    if not t > 0:
        raise ValueError("time derivative needs t > 0")
    return put_part_time_derivative(s, t, opt) + opt.r * opt.E * np.exp(-opt.r * t)


def call_second_derivative(s, t, opt):
    """Closed-form ``u_ss`` (the gamma); requires ``sigma > 0`` and ``t > 0``."""
    s = np.asarray(s, dtype=float)
    d1, _ = _d12(s, t, opt)
    return _npdf(d1) / (s * opt.sigma * np.sqrt(t))


def call_third_derivative(s, t, opt):
    """Closed-form ``u_sss``; shared by call and put."""
    s = np.asarray(s, dtype=float)
    vol = opt.sigma * np.sqrt(t)
    d1, _ = _d12(s, t, opt)
    return -_npdf(d1) / (s * s * vol) * (d1 / vol + 1.0)


def fd_third_derivative(f, x, h):
    """Fourth-order central difference for ``f'''`` on a 7-point stencil."""
    x = np.asarray(x, dtype=float)
    return (-f(x + 3 * h) + 8 * f(x + 2 * h) - 13 * f(x + h)
            + 13 * f(x - h) - 8 * f(x - 2 * h) + f(x - 3 * h)) / (8.0 * h**3)


def eta(t, opt, S, h_star, samples=129, h_fd=None):
    """``max |u_sss(xi, t)|`` over ``xi`` in ``[S - h_star, S]``.

    ``u_sss`` comes from finite differences of the put part with step
    ``h_fd`` (default ``1e-3 * S``) at ``samples`` equispaced points.
    """
    h_fd = 1e-3 * S if h_fd is None else h_fd
    xi = np.linspace(S - h_star, S, samples)
    return float(np.max(np.abs(fd_third_derivative(lambda x: put_part(x, t, opt), xi, h_fd))))


def kappa(S, r, sigma, h_star):
    return 4.0 * sigma**2 * S**3 + 6.0 * r * S**2 * h_star


def truncation_errors(op, opt, t):
    """Split ``delta(t) = u_h'(t) - M u_h(t) - b(t)`` into interior and boundary parts.

    The operator must model the call (``u(0, t) = 0``). The linear part
    ``s - E e^{-rt}`` is reproduced exactly by every stencil except for the
    Dirichlet coupling ``beta_1`` at ``s_0``, so only the put part is pushed
    through ``M``.

    Returns
    -------
    delta_L : ndarray, shape (m,)
    delta_R : ndarray, shape (2,)
    """
    if not t > 0:
        raise ValueError("truncation errors need t > 0")
    s = op.grid.unknown_nodes
    w = put_part(s, t, opt)
    delta = put_part_time_derivative(s, t, opt) - op.matvec(w) - op.source(t)
    delta[0] -= op.beta1 * opt.E * np.exp(-opt.r * t)
    return delta[: op.m], delta[op.m:]
