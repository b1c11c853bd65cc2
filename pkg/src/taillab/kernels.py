"""One-spin density-matrix kernel g(r - r') of a free-electron Fermi gas.

Closed forms in atomic units (lengths in Bohr radii), with R = |r - r'|
and x = k_f R:

    1D:  sin(x)/R            2D:  J1(x)/(2 pi R)
    3D:  [-cos(x) + sin(x)/x] / (2 pi^2 R^2)

These are the ``paper`` normalization.  The ``oracle`` normalization
rescales each form so that g(0) equals the one-spin density of the gas,

    n_1 = k_f/pi (1D),  k_f^2/(4 pi) (2D),  k_f^3/(6 pi^2) (3D),

which matches the brute-force plane-wave sum over a periodic box
(`g_oracle`).  The conversion constants are 1/pi, k_f and k_f
respectively; they are pinned by the oracle-equivalence tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0, j1

from .errors import DomainError

# below this value of k_f*R the closed forms switch to 4th-order Taylor
# expansions to avoid cancellation in the 3D bracket
SMALL_X = 1e-4

# relative tie tolerance for |k| <= k_f when enumerating box states
STATE_TIE_TOL = 1e-12

PAPER = "paper"
ORACLE = "oracle"


@dataclass(frozen=True)
class KernelSpec:
    """Continuum kernel: dimension, Fermi momentum, normalization."""

    dimension: int
    k_f: float
    normalization: str = ORACLE

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.k_f > 0:
            raise DomainError(f"k_f must be positive, got {self.k_f}")
        if self.normalization not in (PAPER, ORACLE):
            raise DomainError(f"unknown normalization {self.normalization!r}")


def fermi_density(dimension: int, k_f: float) -> float:
    """One-spin density of the free Fermi gas in d dimensions."""
    if dimension == 1:
        return k_f / np.pi
    if dimension == 2:
        return k_f**2 / (4 * np.pi)
    if dimension == 3:
        return k_f**3 / (6 * np.pi**2)
    raise DomainError(f"dimension must be 1, 2 or 3, got {dimension}")


def _paper_form(dimension: int, k_f: float, R: np.ndarray) -> np.ndarray:
    """Printed closed forms, with series expansion below SMALL_X."""
    x = k_f * R
    small = x < SMALL_X
    xs = np.where(small, 1.0, x)  # avoid 0/0 in the generic branch
    Rs = np.where(small, 1.0, R)
    x2 = x * x
    if dimension == 1:
        series = k_f * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
        generic = np.sin(x) / Rs
    elif dimension == 2:
        series = (k_f / (2 * np.pi)) * (0.5 - x2 / 16.0 + x2 * x2 / 384.0)
        generic = j1(x) / (2 * np.pi * Rs)
    else:
        series = (k_f**2 / (2 * np.pi**2)) * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0)
        generic = (-np.cos(x) + np.sin(xs) / xs) / (2 * np.pi**2 * Rs**2)
    return np.where(small, series, generic)


def g_closed(spec: KernelSpec, R) -> np.ndarray | float:
    """Closed-form kernel at separation(s) R >= 0.

    Under ``paper`` normalization returns the printed forms; under
    ``oracle`` normalization the result is scaled so g(0) equals the
    one-spin density `fermi_density(d, k_f)`.
    """
    R_arr = np.asarray(R, dtype=float)
    if np.any(R_arr < 0):
        raise DomainError("separation R must be nonnegative")
    out = _paper_form(spec.dimension, spec.k_f, R_arr)
    if spec.normalization == ORACLE:
        scale = {1: 1.0 / np.pi, 2: spec.k_f, 3: spec.k_f}[spec.dimension]
        out = scale * out
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiscreteBandSpec:
    """Filled Fermi sea of plane waves k_n = 2 pi n / L in a d-dim box.

    The occupied set is every integer lattice point of (2 pi / L) Z^d
    with |k| <= k_f (ties resolved by a fixed relative tolerance so the
    set is deterministic).  It is symmetric under k -> -k by
    construction.
    """

    dimension: int
    L: float
    k_f: float
    _states: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not (self.L > 0 and self.k_f > 0):
            raise DomainError("L and k_f must be positive")
        nmax = int(np.floor(self.k_f * self.L / (2 * np.pi))) + 1
        axis = np.arange(-nmax, nmax + 1)
        grids = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        n = np.stack([g.ravel() for g in grids], axis=1)
        k = (2 * np.pi / self.L) * n
        keep = np.sqrt((k**2).sum(axis=1)) <= self.k_f * (1.0 + STATE_TIE_TOL)
        object.__setattr__(self, "_states", k[keep])
        if self.state_count == 0:
            raise DomainError("no plane-wave states below k_f; increase L or k_f")

    @property
    def states(self) -> np.ndarray:
        """Occupied wavevectors, shape (F, d)."""
        return self._states

    @property
    def state_count(self) -> int:
        return self._states.shape[0]

    @property
    def effective_kf(self) -> float:
        """Fermi momentum whose continuum density matches the box density.

        In 1D this is pi*F/L, the standard chain convention (half a grid
        spacing beyond the last occupied state); in 2D/3D it inverts the
        density formula.  Closed-form comparisons against the discrete
        sum should use this momentum, not the nominal cutoff.
        """
        dens = self.state_count / self.L**self.dimension
        if self.dimension == 1:
            return np.pi * dens
        if self.dimension == 2:
            return float(np.sqrt(4 * np.pi * dens))
        return float((6 * np.pi**2 * dens) ** (1.0 / 3.0))


def g_oracle(spec: DiscreteBandSpec, R_vec) -> float:
    """Brute-force kernel (1/L^d) sum_n exp(i k_n . R) over occupied states.

    The imaginary part must vanish by the k -> -k symmetry of the state
    set; it is asserted and discarded.
    """
    R_vec = np.atleast_1d(np.asarray(R_vec, dtype=float))
    if R_vec.shape != (spec.dimension,):
        raise DomainError(
            f"separation vector must have length {spec.dimension}, got {R_vec.shape}"
        )
    phases = spec.states @ R_vec
    total = np.exp(1j * phases).sum() / spec.L**spec.dimension
    assert abs(total.imag) < 1e-12 * abs(total.real) + 1e-15, "nonvanishing Im part"
    return float(total.real)


def g_oracle_radial(spec: DiscreteBandSpec, R: float) -> float:
    """Direction average of `g_oracle` at scalar separation R.

    Averaging exp(i k . R) over orientations of R gives cos(kR) in 1D,
    J0(kR) in 2D and sin(kR)/(kR) in 3D, so the average is evaluated
    exactly instead of by sampling directions.  This is the isotropic
    quantity the continuum closed form should be compared against.
    """
    if R < 0:
        raise DomainError("separation R must be nonnegative")
    km = np.sqrt((spec.states**2).sum(axis=1))
    x = km * R
    if spec.dimension == 1:
        w = np.cos(x)
    elif spec.dimension == 2:
        w = j0(x)
    else:
        xs = np.where(x == 0, 1.0, x)
        w = np.where(x == 0, 1.0, np.sin(xs) / xs)
    return float(w.sum() / spec.L**spec.dimension)


def oracle_equivalence_error(spec: DiscreteBandSpec, separations) -> float:
    """Mean deviation |g_oracle - g_closed| across separations.

    The closed form is evaluated at the box's `effective_kf` and the
    deviation is normalized by the coincidence value g(0) (the one-spin
    density), the natural scale of the kernel.
    """
    closed = KernelSpec(spec.dimension, spec.effective_kf, ORACLE)
    seps = np.asarray(separations, dtype=float)
    go = np.array([g_oracle_radial(spec, R) for R in seps])
    gc = g_closed(closed, seps)
    g0 = fermi_density(spec.dimension, spec.effective_kf)
    return float(np.mean(np.abs(go - gc)) / g0)
