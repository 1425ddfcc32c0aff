"""Finite-difference solver for -1/2 u'' + V u = E u on a symmetric uniform grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainTruncationError, ParameterError

EDGE_MARGIN = 1.0


@dataclass(frozen=True)
class Grid:
    xmax: float
    n: int

    def __post_init__(self):
        if not self.xmax > 0:
            raise ParameterError("xmax must be positive")
        if int(self.n) != self.n or self.n < 201 or self.n % 2 == 0:
            raise ParameterError(f"n must be odd and >= 201, got {self.n}")

    @classmethod
    def from_spacing(cls, xmax: float, h: float) -> "Grid":
        # keep an even number of intervals on each half-line (Simpson-friendly)
        half = 2 * int(np.ceil(xmax / h / 2))
        return cls(float(xmax), 2 * half + 1)

    @property
    def h(self) -> float:
        return 2 * self.xmax / (self.n - 1)

    @property
    def mid(self) -> int:
        return self.n // 2

    @property
    def x(self) -> np.ndarray:
        x = np.linspace(-self.xmax, self.xmax, self.n)
        x[self.mid] = 0.0
        return x

    @property
    def r(self) -> np.ndarray:
        return self.x[self.mid:]

    def refined(self) -> "Grid":
        return Grid(self.xmax, 2 * self.n - 1)


@dataclass(frozen=True, eq=False)
class PotentialOnGrid:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ParameterError(f"expected {self.grid.n} values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("potential has non-finite values")
        scale = 1.0 + np.abs(v).max()
        if np.abs(v - v[::-1]).max() > 1e-9 * scale:
            raise ParameterError("potential is not even-symmetric")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, f) -> "PotentialOnGrid":
        x = grid.x
        v = np.asarray(f(np.abs(x)), dtype=float)
        return cls(grid, symmetrize(v))

    @property
    def edge(self) -> float:
        return float(min(self.values[0], self.values[-1]))

    def shifted(self, c: float) -> "PotentialOnGrid":
        return PotentialOnGrid(self.grid, self.values + c)


def symmetrize(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v + v[::-1])


@dataclass(frozen=True, eq=False)
class EigenPair:
    energy: float
    wavefunction: np.ndarray
    index: int
    parity: int = field(default=0)  # +1 even, -1 odd, 0 for half-line states


def _tridiag_lowest(V: np.ndarray, h: float, m: int):
    """Lowest m eigenpairs with Dirichlet zeros at both ends of V's grid.

    Returns energies and eigenvectors on the full grid (endpoints 0),
    normalized so that sum(u^2) h = 1.
    """
    d = 1.0 / h**2 + V[1:-1]
    e = np.full(d.size - 1, -0.5 / h**2)
    w, U = eigh_tridiagonal(d, e, select="i", select_range=(0, m - 1))
    Uf = np.zeros((V.size, m))
    Uf[1:-1] = U / np.sqrt(h)
    return w, Uf


def _check_m(m, n):
    if int(m) != m or m < 1:
        raise ParameterError("m must be a positive integer")
    if m > n // 4:
        raise ParameterError(f"m={m} too large for n={n}")


def _check_bound(w, edge):
    if w[-1] > edge - EDGE_MARGIN:
        raise DomainTruncationError(
            f"level {w.size - 1} at {w[-1]:.6g} is within {EDGE_MARGIN} of the edge value {edge:.6g}")


def _fix_sign(U: np.ndarray) -> np.ndarray:
    # first significant lobe from the left edge positive, i.e. u'(left) > 0
    for i in range(U.shape[1]):
        u = U[:, i]
        j = np.argmax(np.abs(u) > 1e-6 * np.abs(u).max())
        if u[j] < 0:
            U[:, i] = -u
    return U


def lowest_arrays(V: np.ndarray, h: float, m: int, check_edge: bool = True):
    """Array-level solve used by the inversion loop (no EigenPair wrapping)."""
    w, U = _tridiag_lowest(V, h, m)
    if check_edge:
        _check_bound(w, min(V[0], V[-1]))
    return w, _fix_sign(U)


def solve_lowest(pot: PotentialOnGrid, m: int) -> list[EigenPair]:
    _check_m(m, pot.grid.n)
    w, U = lowest_arrays(pot.values, pot.grid.h, m)
    out = []
    for k in range(m):
        u = U[:, k]
        par = 1 if np.dot(u, u[::-1]) > 0 else -1
        out.append(EigenPair(float(w[k]), u, k, par))
    return out


def halfline_arrays(V_half: np.ndarray, h: float, m: int, check_edge: bool = True):
    """Dirichlet problem on r >= 0; V_half[0] sits at r = 0 and is never used."""
    w, U = _tridiag_lowest(V_half, h, m)
    if check_edge:
        _check_bound(w, V_half[-1])
    return w, _fix_sign(U)


def dirichlet_halfline(pot: PotentialOnGrid, m: int) -> list[EigenPair]:
    """Eigenpairs on xi >= 0 with u(0) = 0, normalized on the half-line."""
    g = pot.grid
    _check_m(m, g.mid + 1)
    w, U = halfline_arrays(pot.values[g.mid:], g.h, m)
    return [EigenPair(float(w[k]), U[:, k], k, 0) for k in range(m)]


def residual_norm(pot: PotentialOnGrid, pair: EigenPair) -> float:
    """||H u - E u|| / ||u|| for a full-grid pair (Dirichlet ends)."""
    u = pair.wavefunction
    h = pot.grid.h
    Hu = np.zeros_like(u)
    Hu[1:-1] = -0.5 * (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2 + pot.values[1:-1] * u[1:-1]
    r = Hu[1:-1] - pair.energy * u[1:-1]
    return float(np.linalg.norm(r) / np.linalg.norm(u))


def richardson_lowest(f, xmax: float, n: int, m: int, halfline: bool = False) -> np.ndarray:
    """(4 E(h/2) - E(h)) / 3 for potential function f(|xi|)."""
    g1 = Grid(xmax, n)
    g2 = g1.refined()
    solve = dirichlet_halfline if halfline else solve_lowest
    e1 = np.array([p.energy for p in solve(PotentialOnGrid.from_function(g1, f), m)])
    e2 = np.array([p.energy for p in solve(PotentialOnGrid.from_function(g2, f), m)])
    return (4 * e2 - e1) / 3
