"""Contact-interaction matrix elements between two-boson states.

W values are in units of alpha^3 (radial functions live in xi = alpha x).
Spherical harmonics use the phase convention Y_l^{m*} = Y_l^{-m}, i.e.
Condon-Shortley harmonics times (-1)^m for m > 0.  With it the ground-bra
element reduces to exactly (1/4pi) * radial integral, with no sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sympy.physics.wigner import gaunt

from .errors import ParameterError
from .radial import RadialBasis

FOUR_PI = 4 * math.pi


@dataclass(frozen=True, order=True)
class QuantumTriple:
    k: int
    ell: int
    m: int = 0

    def __post_init__(self):
        if self.k < 0 or self.ell < 0 or abs(self.m) > self.ell:
            raise ParameterError(f"invalid quantum numbers {self}")


GROUND = QuantumTriple(0, 0, 0)


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n equally spaced points (3/8 rule on the tail if needed)."""
    if n < 4:
        raise ParameterError("need at least 4 points")
    w = np.zeros(n)
    end = n if (n - 1) % 2 == 0 else n - 3
    w[0:end - 1:2] += 1
    w[1:end - 1:2] += 4
    w[2:end:2] += 1
    w *= h / 3
    if end != n:
        w[end - 1:] += 3 * h / 8 * np.array([1, 3, 3, 1])
    return w


@lru_cache(maxsize=None)
def _weights(n, h):
    return simpson_weights(n, h)


def _phase(m: int) -> int:
    return -1 if m > 0 and m % 2 else 1


@lru_cache(maxsize=None)
def _coupling(l1, l2, m1, m2, L):
    # coefficient of Y_{L, m1+m2} in Y_{l1 m1} Y_{l2 m2} (Condon-Shortley)
    M = m1 + m2
    return float((-1) ** M * gaunt(l1, l2, L, m1, m2, -M))


@lru_cache(maxsize=None)
def angular_integral(a: QuantumTriple, b: QuantumTriple, c: QuantumTriple, d: QuantumTriple) -> float:
    """Integral of conj(Y_a Y_b) Y_c Y_d over the sphere."""
    if a.m + b.m != c.m + d.m or (a.ell + b.ell + c.ell + d.ell) % 2:
        return 0.0
    lo = max(abs(a.ell - b.ell), abs(c.ell - d.ell))
    hi = min(a.ell + b.ell, c.ell + d.ell)
    M = a.m + b.m
    total = 0.0
    for L in range(lo, hi + 1):
        if abs(M) > L:
            continue
        total += _coupling(a.ell, b.ell, a.m, b.m, L) * _coupling(c.ell, d.ell, c.m, d.m, L)
    return total * _phase(a.m) * _phase(b.m) * _phase(c.m) * _phase(d.m)


def radial_integral(basis: RadialBasis, a, b, c, d) -> float:
    """Integral of r^2 R_a R_b R_c R_d dr; arguments are (k, l) tuples or triples."""
    Rs = [basis.radial_R(q[0], q[1]) if isinstance(q, tuple) else basis.radial_R(q.k, q.ell)
          for q in (a, b, c, d)]
    r = basis.r
    w = _weights(r.size, basis.h)
    return float(np.dot(w, r * r * Rs[0] * Rs[1] * (Rs[2] * Rs[3])))


def w_ground_to(k1: int, k2: int, ell: int, basis: RadialBasis) -> float:
    """(1/4pi) int r^2 R_00^2 R_{k1 l} R_{k2 l} dr."""
    basis.check_normalized({(0, 0), (k1, ell), (k2, ell)})
    lo, hi = min(k1, k2), max(k1, k2)  # fixed order keeps W(a,b) == W(b,a) bitwise
    return radial_integral(basis, (0, 0), (0, 0), (lo, ell), (hi, ell)) / FOUR_PI


def _is_ground(pair) -> bool:
    return pair[0] == GROUND and pair[1] == GROUND


def w_general(bra, ket, basis: RadialBasis) -> float:
    """<a b | delta | c d> for bra = (a, b), ket = (c, d) of QuantumTriples.

    Exact 0.0 is returned, without quadrature, whenever a selection rule fails.
    """
    bra = tuple(QuantumTriple(*q) if not isinstance(q, QuantumTriple) else q for q in bra)
    ket = tuple(QuantumTriple(*q) if not isinstance(q, QuantumTriple) else q for q in ket)
    if _is_ground(ket) and not _is_ground(bra):
        bra, ket = ket, bra
    if _is_ground(bra):
        c, d = ket
        if c.ell != d.ell or c.m + d.m != 0:
            return 0.0
        return w_ground_to(c.k, d.k, c.ell, basis)
    ang = angular_integral(*bra, *ket)
    if ang == 0.0:
        return 0.0
    basis.check_normalized({(q.k, q.ell) for q in bra + ket})
    return ang * radial_integral(basis, *bra, *ket)


@dataclass(eq=False)
class MatrixElementTable:
    K: int
    entries: dict = field(default_factory=dict)   # ((k1, l), (k2, l)) with k1 <= k2 -> W

    def get(self, a, b) -> float:
        """W_{00,00; a, b} for triples or (k, l) tuples; structural zeros included."""
        a = QuantumTriple(*a) if not isinstance(a, QuantumTriple) else a
        b = QuantumTriple(*b) if not isinstance(b, QuantumTriple) else b
        if a.ell != b.ell or a.m + b.m != 0:
            return 0.0
        key = ((min(a.k, b.k), a.ell), (max(a.k, b.k), a.ell))
        return self.entries[key]

    def to_csv(self) -> str:
        lines = ["k1,k2,ell,W"]
        for (k1, l), (k2, _), in sorted(self.entries):
            lines.append(f"{k1},{k2},{l},{repr(self.entries[((k1, l), (k2, l))])}")
        return "\n".join(lines) + "\n"


def ground_table(basis: RadialBasis, ell_max: int = 0, k_max: int | None = None) -> MatrixElementTable:
    table = MatrixElementTable(basis.K)
    for ell in range(ell_max + 1):
        n = basis.n_levels(ell) if k_max is None else min(k_max + 1, basis.n_levels(ell))
        for k1 in range(n):
            for k2 in range(k1, n):
                table.entries[((k1, ell), (k2, ell))] = w_ground_to(k1, k2, ell, basis)
    return table


def fit_power_law(N, W) -> tuple[float, float]:
    """Least-squares slope of log|W| against log N, with RMS residual."""
    N = np.asarray(N, dtype=float)
    W = np.abs(np.asarray(W, dtype=float))
    if np.unique(N).size < 2:
        raise ParameterError("need at least two distinct N for a fit")
    A = np.column_stack([np.log(N), np.ones(N.size)])
    coef, *_ = np.linalg.lstsq(A, np.log(W), rcond=None)
    resid = np.log(W) - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def scaling_probe(basis: RadialBasis, states) -> tuple[float, float]:
    """Exponent of W_{00; p-K, q-K} versus N for a list of FactorStates."""
    N = [(s.j1 + basis.K) * (s.j2 + basis.K) for s in states]
    W = [w_ground_to(s.j1, s.j2, 0, basis) for s in states]
    return fit_power_law(N, W)
