"""Three-dimensional lift: odd 1D states as s-waves, l > 0 channels, degeneracy audit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import Grid, PotentialOnGrid, halfline_arrays, dirichlet_halfline
from .errors import ContractError, ParameterError
from .inverse import InversionReport
from .spectrum import check_L

FLAG_THRESHOLD = 1e-4


def solve_ell_channel(pot: PotentialOnGrid, ell: int, m: int, check_edge: bool = True):
    """Lowest m levels of -u''/2 + [V + l(l+1)/(2r^2)] u = E u with u(0) = 0.

    Returns (energies, U) with U[:, k] the radial function u on r >= 0.
    """
    if ell < 0 or int(ell) != ell:
        raise ParameterError("ell must be a non-negative integer")
    g = pot.grid
    r = g.r
    V = pot.values[g.mid:].copy()
    V[1:] += ell * (ell + 1) / (2 * r[1:] ** 2)
    return halfline_arrays(V, g.h, m, check_edge)


@dataclass(eq=False)
class RadialBasis:
    K: int
    L: int
    grid: Grid
    potential: PotentialOnGrid          # 3D gauge: s-ground at 0
    s_energies: np.ndarray
    s_functions: np.ndarray             # (len r, n_s) columns v_j(r)
    ell_spectra: dict = field(default_factory=dict)
    ell_functions: dict = field(default_factory=dict)
    tol: float = 1e-8
    _R: dict = field(default_factory=dict, repr=False)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def ell_max(self) -> int:
        return max(self.ell_spectra)

    def n_levels(self, ell: int) -> int:
        return 0 if ell not in self.ell_spectra else len(self.ell_spectra[ell])

    def energy(self, k: int, ell: int) -> float:
        return float(self.ell_spectra[ell][k])

    def u(self, k: int, ell: int) -> np.ndarray:
        try:
            return self.ell_functions[ell][:, k]
        except (KeyError, IndexError):
            raise ParameterError(f"state (k={k}, l={ell}) not in basis") from None

    def radial_R(self, k: int, ell: int) -> np.ndarray:
        key = (k, ell)
        if key not in self._R:
            u = self.u(k, ell)
            R = np.empty_like(u)
            R[1:] = u[1:] / self.r[1:]
            # u ~ r^(l+1): s-waves are finite at the origin, the rest vanish
            R[0] = 3 * R[1] - 3 * R[2] + R[3] if ell == 0 else 0.0
            self._R[key] = R
        return self._R[key]

    def with_channels(self, ell_max: int, m: int | None = None) -> "RadialBasis":
        """Fill l = 1..ell_max with up to m bound levels each (default: as many as s-states)."""
        m = len(self.s_energies) if m is None else m
        for ell in range(1, ell_max + 1):
            if self.n_levels(ell) >= m:
                continue
            w, U = solve_ell_channel(self.potential, ell, m, check_edge=False)
            keep = w <= self.potential.edge - 1.0
            self.ell_spectra[ell] = w[keep]
            self.ell_functions[ell] = U[:, keep]
        return self

    def check_normalized(self, states, tol: float = 1e-6) -> None:
        for k, ell in states:
            u = self.u(k, ell)
            nrm = np.sum(u * u) * self.h
            if abs(nrm - 1) > tol:
                raise ContractError(f"state ({k},{ell}) has norm {nrm:.12g}")


def lift_to_3d(inv: InversionReport, ell_max: int = 0, m_ell: int | None = None) -> RadialBasis:
    """Odd 1D states become s-states; energies move down by ln(1 + 1/L)."""
    L = check_L(inv.L)
    if not inv.converged:
        raise ParameterError("inversion did not converge")
    K = (L + 1) // 2
    n_s = inv.config.m_fit // 2
    if n_s < 1:
        raise ParameterError("need m_fit >= 2 for at least one s-state")
    pot3 = inv.potential.shifted(-math.log1p(1 / L))
    pairs = dirichlet_halfline(pot3, n_s)
    E = np.array([p.energy for p in pairs])
    U = np.column_stack([p.wavefunction for p in pairs])
    basis = RadialBasis(K, L, inv.potential.grid, pot3, E, U, {0: E}, {0: U}, inv.config.tol)
    if ell_max:
        basis.with_channels(ell_max, m_ell)
    return basis


@dataclass(frozen=True)
class Level:
    k: int
    ell: int
    energy: float

    @property
    def multiplicity(self) -> int:
        return 2 * self.ell + 1


@dataclass(eq=False)
class DegeneracyAudit:
    levels: list
    min_gap: float
    flagged: list
    complete: bool
    harmonic_reference: "DegeneracyAudit | None" = None

    def rows(self):
        return [(lv.ell, lv.k, lv.energy, lv.multiplicity) for lv in self.levels]


def _audit(spectra: dict, cutoff, n_levels, flag_threshold) -> DegeneracyAudit:
    levels = sorted((Level(k, ell, float(e)) for ell, es in spectra.items() for k, e in enumerate(es)),
                    key=lambda lv: (lv.energy, lv.ell, lv.k))
    if cutoff is None:
        levels = levels[:n_levels]
        top = levels[-1].energy if levels else -np.inf
    else:
        levels = [lv for lv in levels if lv.energy <= cutoff]
        top = cutoff
    # each channel must reach the top, and the highest l must start at or above it
    lmax = max(spectra)
    complete = all(len(es) and es[-1] >= top for es in spectra.values()) and spectra[lmax][0] >= top
    e = np.array([lv.energy for lv in levels])
    gaps = np.diff(e)
    min_gap = float(gaps.min()) if gaps.size else math.inf
    flagged = [(levels[i], levels[i + 1]) for i in np.nonzero(gaps < flag_threshold)[0]]
    return DegeneracyAudit(levels, min_gap, flagged, bool(complete))


def harmonic_reference(n_max: int = 4, xmax: float = 12.0, n: int = 2401) -> DegeneracyAudit:
    """Audit of the 3D oscillator (E = 2k + l + 3/2) computed numerically with Richardson refinement."""
    spectra = {}
    for ell in range(n_max + 2):
        m = max((n_max - ell) // 2 + 2, 1)
        es = []
        for g in (Grid(xmax, n), Grid(xmax, n).refined()):
            pot = PotentialOnGrid.from_function(g, lambda x: 0.5 * x**2)
            es.append(solve_ell_channel(pot, ell, m)[0])
        spectra[ell] = (4 * es[1] - es[0]) / 3
    return _audit(spectra, n_max + 1.5 + 0.5, None, FLAG_THRESHOLD)


def audit_degeneracy(basis: RadialBasis, energy_cutoff: float | None = None, n_levels: int = 12,
                     flag_threshold: float = FLAG_THRESHOLD, reference: bool = False) -> DegeneracyAudit:
    """Gaps between distinct (k, l) levels; by default over the lowest n_levels."""
    out = _audit(basis.ell_spectra, energy_cutoff, n_levels, flag_threshold)
    if reference:
        out.harmonic_reference = harmonic_reference()
    return out


def spectrum_csv(audit: DegeneracyAudit) -> str:
    lines = ["ell,k,energy,multiplicity"]
    lines += [f"{ell},{k},{repr(e)},{mult}" for ell, k, e, mult in audit.rows()]
    return "\n".join(lines) + "\n"
