"""Decoherence bound on the size of N (internal units hbar = omega0 = 1 by default)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError

MARGIN = 20.0


@dataclass(frozen=True)
class LimitInputs:
    gamma: float
    T_dec: float
    omega0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.T_dec > 0 and self.omega0 > 0 and self.hbar > 0):
            raise ParameterError("all limit inputs must be positive")


def max_semiprime(inp: LimitInputs) -> float:
    """min((gamma T_dec / hbar)^2, (hbar omega0 / gamma)^2)."""
    return min((inp.gamma * inp.T_dec / inp.hbar) ** 2, (inp.hbar * inp.omega0 / inp.gamma) ** 2)


def optimal_gamma(T_dec: float, omega0: float = 1.0, hbar: float = 1.0) -> tuple[float, float]:
    """Closed-form optimum: gamma* = hbar sqrt(omega0 / T_dec), N_max = omega0 T_dec."""
    return hbar * math.sqrt(omega0 / T_dec), omega0 * T_dec


def optimal_gamma_numeric(T_dec: float, omega0: float = 1.0, hbar: float = 1.0) -> tuple[float, float]:
    g0, _ = optimal_gamma(T_dec, omega0, hbar)
    f = lambda lg: -math.log(max_semiprime(LimitInputs(math.exp(lg), T_dec, omega0, hbar)))
    res = minimize_scalar(f, bounds=(math.log(g0) - 10, math.log(g0) + 10), method="bounded",
                          options={"xatol": 1e-10})
    return math.exp(res.x), math.exp(-res.fun)


def bound_table(T_dec: float, gammas, omega0: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Rows (gamma, coherence term, resolution term, bound)."""
    rows = []
    for g in np.asarray(gammas, float):
        inp = LimitInputs(float(g), T_dec, omega0, hbar)
        rows.append((g, (g * T_dec / hbar) ** 2, (hbar * omega0 / g) ** 2, max_semiprime(inp)))
    return np.array(rows)


def rabi_window_check(Omega: float, T_dec: float, N: float, omega0: float = 1.0,
                      margin: float = MARGIN) -> tuple[bool, bool]:
    """(Omega >> 1/T_dec, Omega << omega0/N), each with a factor `margin`."""
    if not (Omega > 0 and T_dec > 0 and N > 0 and margin > 0):
        raise ParameterError("inputs must be positive")
    return bool(Omega * T_dec >= margin), bool(Omega * N / omega0 <= 1 / margin)
