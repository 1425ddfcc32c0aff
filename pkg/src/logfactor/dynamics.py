"""Two-boson amplitudes under the drive gamma sin(omega_ext t) delta(r1 - r2).

Interaction picture:  i db_P/dt = gamma sin(w t) sum_P' e^{i(E_P - E_P')t} W_PP' b_P'
with W_PP' the contact element between symmetrized pair states.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ParameterError, StiffnessError, TruncationError
from .interaction import FOUR_PI, QuantumTriple, _weights, angular_integral
from .radial import RadialBasis

MIN_WINDOW = 20.0


@dataclass(frozen=True)
class PairKet:
    a: QuantumTriple
    b: QuantumTriple
    energy: float

    @property
    def label(self) -> str:
        return f"({self.a.k},{self.a.ell},{self.a.m})+({self.b.k},{self.b.ell},{self.b.m})"

    @property
    def norm_factor(self) -> float:
        # <P|delta|P'> = c_P c_P' <ab|delta|cd>: sqrt(2) for distinct members, 1 for equal
        return 1.0 if self.a == self.b else math.sqrt(2.0)

    @property
    def is_ground(self) -> bool:
        return self.a.k == self.b.k == self.a.ell == self.b.ell == 0


@dataclass(eq=False)
class TwoBosonBasis:
    pairs: list
    energies: np.ndarray
    single: RadialBasis
    E_cut: float
    ell_max: int
    complete: bool = True

    def __len__(self):
        return len(self.pairs)

    def index_of(self, j1: int, j2: int, ell: int = 0, m: int = 0) -> int:
        a, b = sorted([QuantumTriple(j1, ell, m), QuantumTriple(j2, ell, -m)])
        for i, P in enumerate(self.pairs):
            if P.a == a and P.b == b:
                return i
        raise TruncationError(f"pair {a}+{b} not in basis (E_cut={self.E_cut})")

    def single_energies(self, i: int) -> tuple[float, float]:
        P = self.pairs[i]
        s = self.single
        return s.energy(P.a.k, P.a.ell), s.energy(P.b.k, P.b.ell)


def build_basis(basis: RadialBasis, E_cut: float, ell_max: int = 0, require=None) -> TwoBosonBasis:
    """All symmetrized pairs {(k1,l,m),(k2,l,-m)} with total energy <= E_cut.

    `require`, a (j1, j2) s-pair, raises TruncationError when it is cut away.
    """
    if ell_max < 0:
        raise ParameterError("ell_max must be >= 0")
    if not E_cut >= 0:
        raise ParameterError("E_cut must be >= 0")
    basis.with_channels(ell_max)
    seen = set()
    complete = True
    slack = 1e-12
    for ell in range(ell_max + 1):
        es = basis.ell_spectra[ell]
        if es[0] + es[-1] <= E_cut:
            complete = False   # a partner of the top level might still fit
        for m in range(-ell, ell + 1):
            for k1 in range(len(es)):
                for k2 in range(len(es)):
                    e = es[k1] + es[k2]
                    if e > E_cut + slack:
                        continue
                    pair = tuple(sorted([QuantumTriple(k1, ell, m), QuantumTriple(k2, ell, -m)]))
                    seen.add((float(e),) + pair)
    items = sorted(seen, key=lambda t: (t[0], t[1], t[2]))
    pairs = [PairKet(a, b, e) for e, a, b in items]
    out = TwoBosonBasis(pairs, np.array([p.energy for p in pairs]), basis, E_cut, ell_max, complete)
    if require is not None:
        out.index_of(*require)
    return out


def pair_coupling(tb: TwoBosonBasis) -> np.ndarray:
    """Real symmetric matrix <P|delta(r1-r2)|P'> over the pair basis (units alpha^3)."""
    s = tb.single
    r = s.r
    w = _weights(r.size, s.h) * r * r
    F = np.array([s.radial_R(P.a.k, P.a.ell) * s.radial_R(P.b.k, P.b.ell) for P in tb.pairs])
    rad = (F * w) @ F.T
    n = len(tb)
    ang = np.empty((n, n))
    strip = [(QuantumTriple(0, P.a.ell, P.a.m), QuantumTriple(0, P.b.ell, P.b.m)) for P in tb.pairs]
    for i in range(n):
        for j in range(i, n):
            ang[i, j] = ang[j, i] = angular_integral(*strip[i], *strip[j])
    c = np.array([P.norm_factor for P in tb.pairs])
    M = np.outer(c, c) * ang * rad
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class DriveSpec:
    gamma: float
    omega_ext: float

    def __post_init__(self):
        if not self.gamma >= 0 or not math.isfinite(self.gamma):
            raise ParameterError("gamma must be finite and >= 0")
        if not self.omega_ext >= 0:
            raise ParameterError("omega_ext must be >= 0")


def rabi_frequency(gamma: float, W: float) -> float:
    return gamma * W / 2


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray        # (len(times), len(basis)), interaction picture
    basis: TwoBosonBasis
    drive: DriveSpec
    sol: object = field(default=None, repr=False)

    def norm(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def at(self, t) -> np.ndarray:
        if self.sol is None:
            raise ParameterError("trajectory has no dense output")
        return np.asarray(self.sol(t)).T

    def to_csv(self) -> str:
        lines = ["t,pair,re,im,abs2"]
        for t, row in zip(self.times, self.amplitudes):
            for i, b in enumerate(row):
                lines.append(f"{repr(float(t))},{i},{repr(float(b.real))},{repr(float(b.imag))},"
                             f"{repr(float(abs(b) ** 2))}")
        return "\n".join(lines) + "\n"


def evolve_full(tb: TwoBosonBasis, drive: DriveSpec, coupling: np.ndarray, t_end: float,
                times=None, tol: float = 1e-9, b0=None) -> Trajectory:
    """Integrate the truncated coupled system from the ground pair (or b0)."""
    n = len(tb)
    W = np.asarray(coupling)
    if W.shape != (n, n):
        raise ParameterError("coupling matrix does not match basis")
    W = W.astype(complex)  # avoid a real->complex cast of W on every call
    if b0 is None:
        b0 = np.zeros(n, complex)
        b0[0] = 1.0
    E = tb.energies
    g, w = drive.gamma, drive.omega_ext

    def rhs(t, b):
        ph = np.exp(1j * E * t)
        return -1j * g * math.sin(w * t) * ph * (W @ (ph.conj() * b))

    if times is None:
        times = np.linspace(0.0, t_end, 201)
    times = np.asarray(times, float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_ivp(rhs, (0.0, t_end), np.asarray(b0, complex), method="DOP853",
                        rtol=tol, atol=tol * 1e-3, t_eval=times, dense_output=True)
    if sol.status != 0:
        gap = float(E.max() - E.min()) + w
        raise StiffnessError(f"{sol.message}; largest phase frequency {gap:.6g}")
    return Trajectory(times, sol.y.T, tb, drive, sol.sol)


@dataclass(eq=False)
class RabiSolution:
    Omega: float
    t: np.ndarray
    b00: np.ndarray
    bpq: np.ndarray
    factor_energies: tuple = (math.nan, math.nan)

    def at(self, t):
        return np.cos(self.Omega * t), np.sin(self.Omega * t)


def rwa_solution(drive: DriveSpec, W: float, t, factor_energies=(math.nan, math.nan)) -> RabiSolution:
    """b00 = cos(Omega t), bpq = sin(Omega t), Omega = gamma W / 2 (W: bosonic element)."""
    Om = rabi_frequency(drive.gamma, W)
    t = np.asarray(t, float)
    return RabiSolution(Om, t, np.cos(Om * t), np.sin(Om * t), tuple(factor_energies))


@dataclass(frozen=True)
class Measurement:
    t: float
    pair: int                 # index into the basis (RWA: 0 ground, 1 factor)
    energies: tuple
    is_ground: bool
    window_ok: bool


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_measurement(source, T: float, rng=None, t: float | None = None,
                       Omega: float | None = None) -> Measurement:
    """Collapse at t ~ U[0, T] (or the given t) onto a pair with probability |b|^2."""
    rng = _rng(rng)
    if not T > 0:
        raise ParameterError("window T must be positive")
    if t is None:
        t = float(rng.uniform(0.0, T))
    if isinstance(source, RabiSolution):
        Om = source.Omega
        c, s = source.at(t)
        p = np.array([c * c, s * s])
        energies = [(0.0, 0.0), source.factor_energies]
        grounds = [True, False]
    else:
        Om = Omega
        b = source.at(t)
        p = np.abs(b) ** 2
        energies = [source.basis.single_energies(i) for i in range(len(p))]
        grounds = [P.is_ground for P in source.basis.pairs]
    p = p / p.sum()
    i = int(rng.choice(p.size, p=p))
    window_ok = Om is None or abs(Om) * T >= MIN_WINDOW
    return Measurement(float(t), i, tuple(energies[i]), grounds[i], bool(window_ok))


def factor_frequency(sol: RabiSolution, T: float, n: int, rng=None) -> float:
    """Fraction of n window-averaged measurements that land on the factor pair."""
    rng = _rng(rng)
    t = rng.uniform(0.0, T, n)
    return float(np.mean(rng.uniform(size=n) < np.sin(sol.Omega * t) ** 2))
