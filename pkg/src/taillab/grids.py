"""Radial grids, quadrature and finite-difference stencils.

Grids are either uniform in r or uniform in ln r.  Quadrature is
composite Simpson in the flat variable (with the r Jacobian on log
grids), which is 4th order; an odd interval count is handled with a
3/8 closing rule.  Derivatives use 5-point stencils obtained from
local polynomial fits on the actual node positions, so they work on
both schemes and at the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

UNIFORM = "uniform"
LOG = "log"

MIN_POINTS = 500


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n equally spaced samples."""
    if n < 4:
        raise GridError("need at least 4 samples for composite Simpson")
    w = np.zeros(n)
    intervals = n - 1
    if intervals % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= h / 3.0
    else:
        # Simpson on the first even block, 3/8 rule on the last 3 intervals
        m = n - 3
        w[:m] = simpson_weights(m, h)
        w[m - 1 : n] += h * np.array([3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0])
    return w


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial nodes with spacing metadata."""

    r: np.ndarray
    scheme: str
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        object.__setattr__(self, "r", r)
        if r.ndim != 1 or r.size < MIN_POINTS:
            raise GridError(f"grid needs at least {MIN_POINTS} points, got {r.size}")
        if r[0] <= 0:
            raise GridError("grid must start at r > 0")
        if not np.all(np.diff(r) > 0):
            raise GridError("grid must be strictly increasing")
        if self.scheme == UNIFORM:
            h = np.diff(r)
            if not np.allclose(h, h[0], rtol=1e-12, atol=0):
                raise GridError("uniform grid has non-constant spacing")
            w = simpson_weights(r.size, float(h[0]))
        elif self.scheme == LOG:
            ratio = r[1:] / r[:-1]
            if not np.allclose(ratio, ratio[0], rtol=1e-12, atol=0):
                raise GridError("log grid has non-constant ratio")
            # integrate f dr = integrate (f r) d ln r
            w = simpson_weights(r.size, float(np.log(ratio[0]))) * r
        else:
            raise GridError(f"unknown grid scheme {self.scheme!r}")
        object.__setattr__(self, "_weights", w)

    @classmethod
    def uniform(cls, rmin: float, rmax: float, n: int) -> "RadialGrid":
        return cls(np.linspace(rmin, rmax, n), UNIFORM)

    @classmethod
    def log(cls, rmin: float, rmax: float, n: int) -> "RadialGrid":
        return cls(np.geomspace(rmin, rmax, n), LOG)

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def rmin(self) -> float:
        return float(self.r[0])

    @property
    def rmax(self) -> float:
        return float(self.r[-1])

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of sampled values over the grid."""
        values = np.asarray(values)
        if values.shape != self.r.shape:
            raise GridError("values do not match grid size")
        return float(self._weights @ values)

    def extended(self, factor: float) -> "RadialGrid":
        """New grid continuing the same spacing law out to factor*rmax.

        The original nodes are a prefix of the extension, so solutions
        on the two grids can be compared pointwise.
        """
        if factor <= 1:
            raise GridError("extension factor must exceed 1")
        r = self.r
        extra = []
        if self.scheme == LOG:
            ratio = r[1] / r[0]
            nxt = r[-1] * ratio
            while nxt <= factor * self.rmax:
                extra.append(nxt)
                nxt *= ratio
        else:
            h = r[1] - r[0]
            nxt = r[-1] + h
            while nxt <= factor * self.rmax:
                extra.append(nxt)
                nxt += h
        return RadialGrid(np.concatenate([r, extra]), self.scheme)

    def same_as(self, other: "RadialGrid") -> bool:
        return self.scheme == other.scheme and np.array_equal(self.r, other.r)


def _stencil_indices(n: int) -> np.ndarray:
    """5-point stencil start index for every node (centered inside)."""
    start = np.clip(np.arange(n) - 2, 0, n - 5)
    return start


def derivative_matrix_rows(r: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-node 5-point weights for the given derivative order.

    Returns (start, weights) where row i applies weights[i] to
    values[start[i]:start[i]+5].  Weights come from differentiating the
    degree-4 polynomial through the 5 nodes, scaled for conditioning.
    """
    n = r.size
    if n < 5:
        raise GridError("need at least 5 points for 5-point stencils")
    start = _stencil_indices(n)
    offsets = r[start[:, None] + np.arange(5)] - r[:, None]
    scale = np.abs(offsets).max(axis=1)
    t = offsets / scale[:, None]
    # Vandermonde system: sum_j w_j t_j^m = m! * delta_{m,order}
    V = t[:, None, :] ** np.arange(5)[None, :, None]
    rhs = np.zeros((n, 5))
    rhs[:, order] = math.factorial(order)
    w = np.linalg.solve(V, rhs[:, :, None])[:, :, 0]
    w /= scale[:, None] ** order
    return start, w


def second_derivative(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """d^2/dr^2 of sampled values via 5-point polynomial stencils."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.r.shape:
        raise GridError("values do not match grid size")
    start, w = derivative_matrix_rows(grid.r, 2)
    stacked = values[start[:, None] + np.arange(5)]
    return (w * stacked).sum(axis=1)
