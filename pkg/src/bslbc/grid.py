"""Spatial grids on [0, S] for the semidiscretized Black-Scholes operator.

Nodes are indexed ``s_0 = 0 < s_1 < ... < s_{m+2} = S``; the unknowns of the
semidiscrete system live on ``s_1 .. s_{m+2}``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Immutable mesh ``0 = s_0 < ... < s_{m+2} = S``.

    ``h[j-1]`` holds the mesh width ``h_j = s_j - s_{j-1}`` so that the
    1-based quantities used in the scheme formulas are reached with
    :meth:`width`.
    """

    nodes: np.ndarray
    m: int
    S: float
    kind: str = "custom"
    dxi: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size != self.m + 3:
            raise ValueError(f"expected {self.m + 3} nodes, got {nodes.size}")
        if nodes[0] != 0.0 or nodes[-1] != self.S:
            raise ValueError("grid endpoints must be exactly 0 and S")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "h", _frozen(np.diff(nodes)))

    @property
    def n(self):
        """Number of unknowns, ``m + 2``."""
        return self.m + 2

    @property
    def unknown_nodes(self):
        """``s_1 .. s_{m+2}``."""
        return self.nodes[1:]

    def s(self, j):
        return self.nodes[j]

    def width(self, j):
        """Mesh width ``h_j`` for ``1 <= j <= m+2``."""
        if not 1 <= j <= self.m + 2:
            raise IndexError(f"h_{j} undefined for m={self.m}")
        return self.h[j - 1]

    def H(self, j):
        """``H_j = h_j + h_{j+1}`` for ``1 <= j <= m+1``."""
        if not 1 <= j <= self.m + 1:
            raise IndexError(f"H_{j} undefined for m={self.m}")
        return self.h[j - 1] + self.h[j]

    @property
    def h_last(self):
        """``h_{m+2}``, the width of the boundary cell ``[s_{m+1}, S]``."""
        return self.h[-1]

    def smoothness(self):
        """Return ``max_j |h_{j+1} - h_j| / dxi**2`` (sinh grids only)."""
        if self.dxi is None:
            raise ValueError("smoothness is defined relative to a mapped grid")
        return np.max(np.abs(np.diff(self.h))) / self.dxi**2

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["j", "s_j", "h_j"])
            for j in range(self.nodes.size):
                h = "" if j == 0 else f"{self.h[j - 1]:.17g}"
                w.writerow([j, f"{self.nodes[j]:.17g}", h])


def build_uniform_grid(S, m):
    """Uniform grid with ``m + 2`` equal cells of width ``S / (m + 2)``."""
    if not S > 0:
        raise ValueError("S must be positive")
    if m < 1:
        raise ValueError("m must be at least 1")
    nodes = S * np.arange(m + 3) / (m + 2)
    nodes[-1] = S
    return Grid(nodes, m=int(m), S=float(S), kind="uniform")


def build_sinh_grid(E, c, S, m):
    """Grid clustered around the strike via ``s = E + c*sinh(xi)``.

    ``xi`` is uniform on ``[asinh(-E/c), asinh((S-E)/c)]`` with ``m + 2``
    cells. The endpoints are overwritten with 0 and S afterwards so the
    boundary formulas see ``s_{m+2} == S`` exactly.

    Parameters
    ----------
    E : float
        Clustering point (the strike), ``0 < E < S``.
    c : float
        Clustering width; smaller values concentrate more nodes near E.
    S : float
        Upper end of the truncated domain.
    m : int
        Interior block dimension; the grid has ``m + 3`` nodes.
    """
    if not 0 < E < S:
        raise ValueError("need 0 < E < S")
    if not c > 0:
        raise ValueError("c must be positive")
    if m < 1:
        raise ValueError("m must be at least 1")
    a = np.arcsinh(-E / c)
    b = np.arcsinh((S - E) / c)
    dxi = (b - a) / (m + 2)
    xi = a + np.arange(m + 3) * dxi
    nodes = E + c * np.sinh(xi)
    nodes[0] = 0.0
    nodes[-1] = S
    return Grid(nodes, m=int(m), S=float(S), kind="sinh", dxi=float(dxi),
                meta={"E": float(E), "c": float(c)})
