"""Multipole exchange source and induced radial tails for model atoms.

The radial problem solved here, in atomic units, is

    [-1/2 d^2/dr^2 + (U_eff(r) - E)] xi(r) = K(r)

with U_eff = U + l(l+1)/(2 r^2).  The right-hand side K is assembled
from model orbitals as a sum of multipole terms C * b * xi_n(r)/r^(k+1)
with moments b = integral r^k xi_n xi_i dr.  Two routes give the
induced solution: a local inversion series (valid where the denominator
U_eff - E dominates the curvature of the source term) and a direct
banded boundary-value solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import eval_genlaguerre

from .errors import (
    ConditioningError,
    DomainError,
    GridError,
    ResolutionError,
    SingularDenominatorError,
)
from .grids import RadialGrid, derivative_matrix_rows, second_derivative

DENOMINATOR_FLOOR = 1e-6  # Hartree; series precondition
NODE_NOISE_FLOOR = 1e-14  # fraction of max|xi| ignored when counting nodes


@dataclass(frozen=True)
class Orbital:
    """Sampled radial function xi(r) = r * phi(r) with labels."""

    grid: RadialGrid
    xi: np.ndarray
    l: int
    energy: float
    label: str = ""
    normalized: bool = False

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)
        if xi.shape != self.grid.r.shape:
            raise GridError("orbital samples do not match grid")
        if self.l < 0:
            raise DomainError("angular momentum must be nonnegative")

    def norm(self) -> float:
        return self.grid.integrate(self.xi**2)


@dataclass(frozen=True)
class EffectivePotential:
    """Local potential U(r) plus centrifugal term for angular momentum l."""

    grid: RadialGrid
    U: np.ndarray
    l: int

    @classmethod
    def coulomb(cls, grid: RadialGrid, Z: float, l: int = 0) -> "EffectivePotential":
        return cls(grid, -Z / grid.r, l)

    @classmethod
    def screened(
        cls, grid: RadialGrid, Z: float, r_s: float, l: int = 0
    ) -> "EffectivePotential":
        """Coulomb with Thomas-Fermi-like screening Z(r) = 1 + (Z-1) e^(-r/r_s)."""
        zr = 1.0 + (Z - 1.0) * np.exp(-grid.r / r_s)
        return cls(grid, -zr / grid.r, l)

    def u_eff(self) -> np.ndarray:
        return self.U + self.l * (self.l + 1) / (2.0 * self.grid.r**2)


@dataclass(frozen=True)
class SourceTerm:
    label: str
    k: int
    coefficient: float
    moment: float
    orbital: Orbital

    def profile(self) -> np.ndarray:
        r = self.orbital.grid.r
        return self.coefficient * self.moment * self.orbital.xi / r ** (self.k + 1)


@dataclass(frozen=True)
class ExchangeSource:
    """Sampled source K(r) together with its recorded multipole terms."""

    grid: RadialGrid
    K: np.ndarray
    terms: tuple[SourceTerm, ...]


def hydrogenic_orbital(Z: float, n: int, l: int, grid: RadialGrid) -> Orbital:
    """Analytic hydrogenic xi_nl(r; Z), normalized, energy -Z^2/(2 n^2)."""
    if Z <= 0:
        raise DomainError("effective charge must be positive")
    if n < l + 1:
        raise DomainError(f"need n >= l+1, got n={n}, l={l}")
    body = 5.0 * n * n / Z
    if np.count_nonzero(grid.r < body) < 20:
        raise ResolutionError(
            f"fewer than 20 grid points inside r < {body:.3g}; grid too coarse"
        )
    rho = 2.0 * Z * grid.r / n
    norm = math.sqrt(
        (2.0 * Z / n) ** 3 * math.factorial(n - l - 1) / (2.0 * n * math.factorial(n + l))
    )
    radial = norm * np.exp(-rho / 2.0) * rho**l * eval_genlaguerre(n - l - 1, 2 * l + 1, rho)
    return Orbital(
        grid=grid,
        xi=grid.r * radial,
        l=l,
        energy=-(Z**2) / (2.0 * n * n),
        label=f"{n}{'spdfgh'[l] if l < 6 else f'l{l}'}(Z={Z:g})",
        normalized=True,
    )


def moment_b(n_orbital: Orbital, i_orbital: Orbital, k: int) -> float:
    """Radial moment integral r^k xi_n xi_i dr (same grid required)."""
    if k < 0:
        raise DomainError("multipolarity k must be nonnegative")
    if not n_orbital.grid.same_as(i_orbital.grid):
        raise GridError("orbitals live on different grids")
    g = n_orbital.grid
    return g.integrate(g.r**k * n_orbital.xi * i_orbital.xi)


def threej_zero(l1: int, l2: int, l3: int) -> float:
    """Wigner 3j symbol (l1 l2 l3; 0 0 0), closed form.

    Vanishes unless l1+l2+l3 is even and the triangle rule holds.
    """
    J = l1 + l2 + l3
    if J % 2 == 1:
        return 0.0
    if abs(l1 - l2) > l3 or l3 > l1 + l2:
        return 0.0
    g = J // 2
    sign = -1.0 if g % 2 else 1.0
    pref = math.sqrt(
        math.factorial(J - 2 * l1)
        * math.factorial(J - 2 * l2)
        * math.factorial(J - 2 * l3)
        / math.factorial(J + 1)
    )
    return (
        sign
        * pref
        * math.factorial(g)
        / (math.factorial(g - l1) * math.factorial(g - l2) * math.factorial(g - l3))
    )


def closed_shell_coefficient(l_target: int, k: int, l_source: int) -> float:
    """Exchange angular factor for a spin-averaged closed source shell.

    (occupancy per spin) * |reduced spherical tensor element|^2 / (2 l_t + 1)
    = (2 l_s + 1)^2 * threej_zero(l_t, k, l_s)^2, with the usual triangle
    and parity selection built into the 3j symbol.
    """
    occ_per_spin = 2 * l_source + 1
    reduced_sq = (2 * l_target + 1) * (2 * l_source + 1) * threej_zero(l_target, k, l_source) ** 2
    return occ_per_spin * reduced_sq / (2 * l_target + 1)


def exchange_source(
    target: Orbital,
    occupied: list[Orbital],
    k_max: int,
    coeff_fn=None,
) -> ExchangeSource:
    """Far-zone multipole source K(r) = sum C * b * xi_n(r) / r^(k+1).

    Multipolarities run from 1 to k_max; the k = 0 term never appears
    because same-l radial orthogonality kills its moment.  `coeff_fn`
    (l_target, k, l_source) -> C overrides the closed-shell angular
    factors, which is convenient for tests.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    coeff_fn = coeff_fn or closed_shell_coefficient
    grid = target.grid
    terms = []
    K = np.zeros(grid.n)
    for orb in occupied:
        if not orb.grid.same_as(grid):
            raise GridError("occupied orbital on a different grid")
        for k in range(1, k_max + 1):
            C = coeff_fn(target.l, k, orb.l)
            if C == 0.0:
                continue
            b = moment_b(orb, target, k)
            term = SourceTerm(orb.label, k, C, b, orb)
            terms.append(term)
            K += term.profile()
    return ExchangeSource(grid=grid, K=K, terms=tuple(terms))


def _window_slice(grid: RadialGrid, window) -> slice:
    if window is None:
        return slice(0, grid.n)
    lo, hi = window
    idx = np.nonzero((grid.r >= lo) & (grid.r <= hi))[0]
    if idx.size < 5:
        raise DomainError("window contains fewer than 5 grid points")
    return slice(int(idx[0]), int(idx[-1]) + 1)


def solve_induced_series(
    source: ExchangeSource,
    ueff: EffectivePotential,
    energy: float,
    order: int,
    window=None,
) -> np.ndarray:
    """Inversion-series solution K/(U_eff - E) [+ curvature correction].

    order=1 keeps the leading term; order=2 adds
    (1/(2(U_eff-E))) d^2/dr^2 [K/(U_eff-E)].  Returns samples on the
    full grid with NaN outside the requested window.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    grid = source.grid
    if not ueff.grid.same_as(grid):
        raise GridError("potential grid does not match source grid")
    sl = _window_slice(grid, window)
    denom = ueff.u_eff() - energy
    dwin = denom[sl]
    if np.any(np.diff(np.sign(dwin)) != 0):
        cross = np.nonzero(np.diff(np.sign(dwin)) != 0)[0][0]
        raise SingularDenominatorError(float(grid.r[sl][cross]))
    if np.any(np.abs(dwin) <= DENOMINATOR_FLOOR):
        bad = np.nonzero(np.abs(dwin) <= DENOMINATOR_FLOOR)[0][0]
        raise SingularDenominatorError(float(grid.r[sl][bad]))
    w1 = source.K[sl] / dwin
    out = np.full(grid.n, np.nan)
    if order == 1:
        out[sl] = w1
        return out
    sub = RadialGrid.__new__(RadialGrid)  # windowed derivative without re-validation
    start, wts = derivative_matrix_rows(grid.r[sl], 2)
    d2 = (wts * w1[start[:, None] + np.arange(5)]).sum(axis=1)
    out[sl] = w1 + d2 / (2.0 * dwin)
    return out


def solve_induced_direct(
    source: ExchangeSource, ueff: EffectivePotential, energy: float
) -> np.ndarray:
    """Direct banded solve of the radial boundary-value problem.

    Imposes xi(rmin) = xi(rmax) = 0 and inverts
    [-1/2 d^2/dr^2 + (U_eff - E)] with 5-point stencils (bandwidth 3).
    """
    grid = source.grid
    if not ueff.grid.same_as(grid):
        raise GridError("potential grid does not match source grid")
    denom = ueff.u_eff() - energy
    if denom[-1] <= 0:
        raise DomainError("energy not below the continuum at rmax")
    n = grid.n
    start, wts = derivative_matrix_rows(grid.r, 2)
    # unknowns are interior nodes 1..n-2
    m = n - 2
    ab = np.zeros((7, m))  # (l=3, u=3) banded storage
    rhs = source.K[1:-1].copy()
    for i in range(1, n - 1):
        row = i - 1
        s = start[i]
        for j in range(5):
            col_node = s + j
            w = -0.5 * wts[i, j]
            if col_node == i:
                w += denom[i]
            if col_node in (0, n - 1):
                continue  # boundary values are zero
            col = col_node - 1
            ab[3 + row - col, col] += w
    try:
        interior = solve_banded((3, 3), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(str(exc)) from exc
    if not np.all(np.isfinite(interior)):
        raise ConditioningError("non-finite values in boundary-value solution")
    xi = np.zeros(n)
    xi[1:-1] = interior
    return xi


def turning_point(ueff: EffectivePotential, energy: float):
    """Outermost radius where U_eff - E changes sign (None if it never does)."""
    denom = ueff.u_eff() - energy
    sign_change = np.nonzero(np.diff(np.sign(denom)) != 0)[0]
    if sign_change.size == 0:
        return None
    i = int(sign_change[-1])
    r, d = ueff.grid.r, denom
    return float(r[i] - d[i] * (r[i + 1] - r[i]) / (d[i + 1] - d[i]))


def series_validity_start(
    source: ExchangeSource,
    ueff: EffectivePotential,
    energy: float,
    factor: float = 10.0,
):
    """First radius beyond the turning point where the series is trusted.

    The leading term w1 = K/(U_eff - E) must satisfy
    |U_eff - E| >= factor * |w1''| / |w1| there; the scan accepts the
    first radius where this holds and ignores later violations (they
    come from isolated zeros of the source, not from the turning point).
    """
    grid = source.grid
    denom = ueff.u_eff() - energy
    rt = turning_point(ueff, energy)
    lo = 0 if rt is None else int(np.searchsorted(grid.r, rt))
    usable = np.abs(denom) > DENOMINATOR_FLOOR
    usable[: lo + 1] = False
    idx = np.nonzero(usable)[0]
    if idx.size < 5:
        raise DomainError("no usable region beyond the turning point")
    sl = slice(int(idx[0]), grid.n)
    w1 = source.K[sl] / denom[sl]
    start, wts = derivative_matrix_rows(grid.r[sl], 2)
    d2 = (wts * w1[start[:, None] + np.arange(5)]).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = np.abs(d2) / np.abs(w1)
    ok = np.abs(denom[sl]) >= factor * curvature
    first = np.argmax(ok)
    if not ok[first]:
        raise DomainError("series never becomes valid on this grid")
    return float(grid.r[sl][first])


def count_nodes(xi: np.ndarray, r: np.ndarray, window=None) -> int:
    """Strict sign changes of xi inside the window, above the noise floor."""
    xi = np.asarray(xi, dtype=float)
    r = np.asarray(r, dtype=float)
    if window is not None:
        mask = (r >= window[0]) & (r <= window[1])
        xi = xi[mask]
    if xi.size < 100:
        raise DomainError("need at least 100 samples in the node-count window")
    floor = NODE_NOISE_FLOOR * np.max(np.abs(xi))
    signs = np.sign(xi[np.abs(xi) > floor])
    return int(np.count_nonzero(np.diff(signs) != 0))


@dataclass(frozen=True)
class ComposedOrbital:
    """Free + induced radial function and the radius where the tail wins."""

    grid: RadialGrid
    xi: np.ndarray
    crossover: float | None


def compose_orbital(free: Orbital, induced: np.ndarray) -> ComposedOrbital:
    """Pointwise xi_free + xi_ind; crossover = first r with |ind| > |free|."""
    induced = np.asarray(induced, dtype=float)
    if induced.shape != free.grid.r.shape:
        raise GridError("induced samples do not match the orbital grid")
    filled = np.where(np.isnan(induced), 0.0, induced)
    bigger = np.nonzero(np.abs(filled) > np.abs(free.xi))[0]
    crossover = float(free.grid.r[bigger[0]]) if bigger.size else None
    return ComposedOrbital(free.grid, free.xi + filled, crossover)


def local_envelope(values: np.ndarray, r: np.ndarray, sidefactor: float = 1.5) -> np.ndarray:
    """Running max of |values| over [r/sidefactor, r*sidefactor].

    Used to normalize deviations of oscillatory profiles so isolated
    zeros do not blow up pointwise relative errors.
    """
    values = np.abs(np.asarray(values, dtype=float))
    r = np.asarray(r, dtype=float)
    lo = np.searchsorted(r, r / sidefactor, side="left")
    hi = np.searchsorted(r, r * sidefactor, side="right")
    return np.array([values[a:b].max() for a, b in zip(lo, hi)])


def relative_deviation(a: np.ndarray, b: np.ndarray, r: np.ndarray) -> float:
    """Max |a - b| relative to the local oscillation envelope of b."""
    env = local_envelope(b, r)
    good = env > 0
    return float(np.max(np.abs(a - b)[good] / env[good]))
