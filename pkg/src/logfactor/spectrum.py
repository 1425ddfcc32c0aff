"""Logarithmic level law and the arithmetic of splitting ln(N/K^2) over two levels.

All energies are dimensionless, in units of hbar*omega0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DecodeError, InconsistencyError, ParameterError, ProtocolDomainError


def check_L(L) -> int:
    if isinstance(L, bool) or int(L) != L:
        raise ParameterError(f"L must be an integer, got {L!r}")
    L = int(L)
    if L < 3 or L % 2 == 0:
        raise ParameterError(f"L must be odd and >= 3, got {L}")
    return L


def check_K(K) -> int:
    if isinstance(K, bool) or int(K) != K or int(K) < 2:
        raise ParameterError(f"K must be an integer >= 2, got {K!r}")
    return int(K)


def K_of(L) -> int:
    return (check_L(L) + 1) // 2


def level_1d(k, L):
    """ln(k/L + 1); accepts scalars or integer arrays."""
    L = check_L(L)
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ParameterError("level index must be >= 0")
    if k_arr.ndim == 0:
        return math.log1p(int(k) / L)
    return np.log1p(k_arr / L)


def level_3d(j, K):
    """ln(j/K + 1), the s-state ladder after dropping even 1D states."""
    K = check_K(K)
    j_arr = np.asarray(j)
    if np.any(j_arr < 0):
        raise ParameterError("level index must be >= 0")
    if j_arr.ndim == 0:
        return math.log1p(int(j) / K)
    return np.log1p(j_arr / K)


@dataclass(frozen=True)
class SpectrumTarget:
    L: int
    energy_unit: float = 1.0

    def __post_init__(self):
        check_L(self.L)
        if not self.energy_unit > 0:
            raise ParameterError("energy_unit must be positive")

    @property
    def K(self) -> int:
        return (self.L + 1) // 2

    @property
    def shift(self) -> float:
        """Energy of the lowest odd 1D state, removed when lifting to 3D."""
        return math.log1p(1 / self.L)

    def levels_1d(self, m: int) -> np.ndarray:
        return level_1d(np.arange(m), self.L)

    def levels_3d(self, m: int) -> np.ndarray:
        return level_3d(np.arange(m), self.K)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def predivide(N: int, K: int) -> tuple[int, list[int]]:
    """Strip every factor 2..K by trial division; return (remainder, removed factors)."""
    if N < 1:
        raise ParameterError("N must be positive")
    removed = []
    for f in range(2, K + 1):
        while N % f == 0:
            N //= f
            removed.append(f)
    return N, removed


@dataclass(frozen=True)
class Semiprime:
    N: int
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError("N must be positive")
        if (self.p is None) != (self.q is None):
            raise ParameterError("give both factors or neither")
        if self.p is not None:
            if self.p * self.q != self.N:
                raise ParameterError(f"{self.p}*{self.q} != {self.N}")
            if not (is_prime(self.p) and is_prime(self.q)):
                raise ParameterError("factors must be prime")
            if self.p < self.q:
                raise ParameterError("convention is p >= q")

    @classmethod
    def from_factors(cls, a: int, b: int) -> "Semiprime":
        p, q = max(a, b), min(a, b)
        return cls(p * q, p, q)

    def coprime_below(self, K: int) -> bool:
        return all(self.N % f for f in range(2, K + 1))


@dataclass(frozen=True)
class FactorState:
    j1: int
    j2: int
    total_energy: float
    K: int = field(default=2, compare=False)

    def __post_init__(self):
        if self.j1 < 1 or self.j2 < 1:
            raise ProtocolDomainError("factor-state indices must be >= 1")

    @property
    def factors(self) -> tuple[int, int]:
        return self.j1 + self.K, self.j2 + self.K


def factor_state_of(N: Semiprime, K: int) -> FactorState:
    """Two-boson state whose energy sum is ln(N/K^2). Needs the oracle factors."""
    K = check_K(K)
    if N.p is None:
        raise ParameterError("factor_state_of needs the oracle factors p, q")
    if N.q <= K:
        raise ProtocolDomainError(
            f"factor {N.q} <= K={K}: trivial or negative index, pre-divide first")
    return FactorState(N.p - K, N.q - K, math.log(N.N / K**2), K)


def half_gap(j: int, K: int) -> float:
    """Half the distance to the nearest neighbouring level of ln(j/K+1)."""
    up = math.log((j + K + 1) / (j + K))
    if j == 0:
        return up / 2
    return min(up, math.log((j + K) / (j + K - 1))) / 2


def nearest_level(e: float, K: int) -> int:
    j = K * math.expm1(e)
    return max(int(round(j)), 0)


def factor_from_energy(e: float, K: int, N: int, tol: float | None = None) -> tuple[int, int]:
    """Decode one measured single-particle energy into (q, N // q).

    The nearest level j = K(e^e - 1) is accepted when |e - ln(j/K+1)| <= tol,
    which defaults to half the local level gap.
    """
    K = check_K(K)
    j = nearest_level(e, K)
    off = abs(e - level_3d(j, K))
    limit = half_gap(j, K) if tol is None else tol
    if off > limit:
        raise DecodeError(f"energy {e!r} is {off:.3g} from the nearest level (tolerance {limit:.3g})")
    if j < 1:
        raise DecodeError("energy decodes to the ground level, which carries no factor")
    q = j + K
    if N % q:
        raise InconsistencyError(f"decoded factor {q} does not divide {N}")
    return q, N // q


def splittings(N: int, K: int) -> list[tuple[int, int]]:
    """All (j1 >= j2 >= 1) with (j1+K)(j2+K) == N, i.e. every exact energy split."""
    out = []
    a = K + 1
    while a * a <= N:
        if N % a == 0 and N // a > K:
            out.append((N // a - K, a - K))
        a += 1
    return out
