"""Factorization driver: tune the drive to ln(N/K^2), sample, decode."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from functools import lru_cache

import numpy as np

from .dynamics import (DriveSpec, RabiSolution, TwoBosonBasis, build_basis, evolve_full,
                       pair_coupling, rwa_solution, sample_measurement, MIN_WINDOW)
from .errors import (DecodeError, InconsistencyError, ParameterError, TruncationError)
from .interaction import w_ground_to
from .inverse import InversionConfig, invert_spectrum
from .radial import RadialBasis, lift_to_3d
from .spectrum import K_of, check_L, factor_from_energy, is_prime, predivide

DEFAULT_RABI_RATIO = {"rwa": 1e-2, "full": 3e-2}   # Omega * N / omega0


def resonance_margin(N: int, K: int | None = None) -> float:
    """Distance from ln(N/K^2) to the neighbouring sums ln((N +- 1)/K^2); ~1/N."""
    if N < 2:
        raise ParameterError("N must be >= 2")
    return min(abs(math.log((N + 1) / N)), abs(math.log((N - 1) / N)))


@dataclass(frozen=True)
class ProtocolConfig:
    N: int
    L: int
    gamma: float | None = None
    T_window: float | None = None
    seed: int = 0
    mode: str = "rwa"
    N_raw: int | None = None
    removed: tuple = ()
    status: str = "ready"
    max_attempts: int = 64
    ell_max: int = 2
    E_cut: float | None = None
    m_fit: int | None = None

    def __post_init__(self):
        check_L(self.L)
        if self.mode not in ("rwa", "full"):
            raise ParameterError(f"mode must be rwa or full, got {self.mode!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise ParameterError("gamma must be positive")
        if self.T_window is not None and not self.T_window > 0:
            raise ParameterError("T_window must be positive")
        if self.max_attempts < 1:
            raise ParameterError("max_attempts must be >= 1")
        if self.status == "ready":
            K = self.K
            if self.N % 2 == 0 or any(self.N % f == 0 for f in range(2, K + 1)):
                raise ParameterError(f"N={self.N} shares a factor <= K={K}; use prepare()")
            if self.N < (K + 1) ** 2:
                raise ParameterError(f"N={self.N} below (K+1)^2")

    @property
    def K(self) -> int:
        return K_of(self.L)

    @property
    def omega_ext(self) -> float:
        return math.log(self.N / self.K**2)

    def levels_needed(self) -> int:
        """1D levels to fit so every s-pair up to the drive energy (plus cut) is present."""
        K = self.K
        extra = 0.0 if self.mode == "rwa" else 3 * math.log1p(1 / self.N)
        j_top = int(self.N * math.exp(extra) / (K + 1)) - K
        return max(16, 2 * (j_top + 1))


def prepare(N_raw: int, L: int, **kw) -> ProtocolConfig:
    """Trial-divide factors 2..K; a remainder of 1 or a prime is reported, not run."""
    K = K_of(L)
    if int(N_raw) != N_raw or N_raw < 2:
        raise ParameterError("N must be an integer >= 2")
    N, removed = predivide(int(N_raw), K)
    status = "ready"
    if N == 1:
        status = "trivial"
    elif is_prime(N):
        status = "prime"
    return ProtocolConfig(N=N, L=L, N_raw=int(N_raw), removed=tuple(removed), status=status, **kw)


@dataclass(eq=False)
class Physics:
    """Single-particle side shared by many runs: the fitted well and its 3D lift."""
    L: int
    m_fit: int
    basis: RadialBasis

    @property
    def K(self):
        return self.basis.K


@lru_cache(maxsize=8)
def build_physics(L: int, m_fit: int) -> Physics:
    rep = invert_spectrum(InversionConfig(L, m_fit))
    if not rep.converged:
        raise TruncationError(f"inversion for L={L}, m_fit={m_fit} did not converge")
    return Physics(L, m_fit, lift_to_3d(rep))


@dataclass(eq=False)
class Plan:
    config: ProtocolConfig
    source: object            # RabiSolution or Trajectory
    Omega: float
    gamma: float
    T: float
    diagnostics: dict


def _s_pairs(basis: RadialBasis):
    e = basis.s_energies
    return [(e[a] + e[b], a, b) for a in range(len(e)) for b in range(a + 1)]


def _resonant(pairs, omega):
    # the drive alone picks the pair: the s-pair sum nearest omega_ext
    best = min(pairs, key=lambda t: abs(t[0] - omega))
    others = [abs(t[0] - omega) for t in pairs if t is not best]
    return best, (min(others) if others else math.inf)


def plan(cfg: ProtocolConfig, physics: Physics | None = None) -> Plan:
    if cfg.status != "ready":
        raise ParameterError(f"config status {cfg.status!r}: nothing to run")
    if physics is None:
        physics = build_physics(cfg.L, cfg.m_fit or cfg.levels_needed())
    basis = physics.basis
    K, N, omega = cfg.K, cfg.N, cfg.omega_ext
    margin = resonance_margin(N, K)
    (e_res, j1, j2), nearest = _resonant(_s_pairs(basis), omega)
    detuning = abs(e_res - omega)
    if detuning > margin / 2:
        raise TruncationError(
            f"no s-pair within {margin / 2:.3g} of omega_ext={omega:.6g} (closest off by {detuning:.3g}); "
            "fit more levels")
    ratio = DEFAULT_RABI_RATIO[cfg.mode]
    diag = {"detuning_factor": detuning, "detuning_nearest_other": nearest,
            "margin": margin, "levels_available": len(basis.s_energies)}
    if cfg.mode == "rwa":
        W = (1.0 if j1 == j2 else math.sqrt(2.0)) * w_ground_to(j1, j2, 0, basis)
        gamma = cfg.gamma if cfg.gamma is not None else 2 * ratio / (N * W)
        Om = gamma * W / 2
        T = cfg.T_window if cfg.T_window is not None else 10 * math.pi / abs(Om)
        src = rwa_solution(DriveSpec(gamma, omega), W, [0.0],
                           (basis.s_energies[j1], basis.s_energies[j2]))
    else:
        E_cut = cfg.E_cut if cfg.E_cut is not None else omega + 3 * math.log1p(1 / N)
        tb = build_basis(basis, E_cut, cfg.ell_max)
        M = pair_coupling(tb)
        i = tb.index_of(j1, j2)
        W = M[0, i]
        gamma = cfg.gamma if cfg.gamma is not None else 2 * ratio / (N * W)
        Om = gamma * W / 2
        # integration cost grows with T, so the full solver uses the shortest allowed window
        T = cfg.T_window if cfg.T_window is not None else MIN_WINDOW / abs(Om)
        src = evolve_full(tb, DriveSpec(gamma, omega), M, T, times=[0.0, T])
        diag.update(pairs=len(tb), basis_complete=tb.complete,
                    norm_error=float(abs(src.norm()[-1] - 1)))
    diag.update(window=abs(Om) * T, window_ok=abs(Om) * T >= MIN_WINDOW,
                omega_N=abs(Om) * N)
    return Plan(cfg, src, Om, gamma, T, diag)


@dataclass(eq=False)
class ProtocolResult:
    N: int
    L: int
    K: int
    factors: tuple | None
    attempts: int
    Omega: float | None
    margin: float
    seed: int
    mode: str
    status: str
    N_raw: int | None = None
    removed: tuple = ()
    gamma: float | None = None
    T_window: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("factored", "trivial", "prime")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["factors"] = list(self.factors) if self.factors else None
        d["removed"] = list(self.removed)
        return d


def execute(p: Plan, rng) -> ProtocolResult:
    """Measure until a non-ground outcome, then read one particle and divide."""
    cfg = p.config
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    diag = dict(p.diagnostics)
    base = dict(N=cfg.N, L=cfg.L, K=cfg.K, Omega=p.Omega, margin=diag["margin"], seed=cfg.seed,
                mode=cfg.mode, N_raw=cfg.N_raw, removed=cfg.removed, gamma=p.gamma,
                T_window=p.T)
    Om = p.Omega if not isinstance(p.source, RabiSolution) else None
    for attempt in range(1, cfg.max_attempts + 1):
        m = sample_measurement(p.source, p.T, rng, Omega=Om)
        if m.is_ground:
            continue
        e = m.energies[int(rng.integers(2))]
        try:
            q, other = factor_from_energy(e, cfg.K, cfg.N)
        except DecodeError:
            # a spectator pair with one particle left in the ground level: re-prepare
            continue
        except InconsistencyError as exc:
            diag["error"] = str(exc)
            return ProtocolResult(factors=None, attempts=attempt, status="inconsistent",
                                  diagnostics=diag, **base)
        return ProtocolResult(factors=(max(q, other), min(q, other)), attempts=attempt,
                              status="factored", diagnostics=diag, **base)
    diag["error"] = f"no usable outcome in {cfg.max_attempts} attempts"
    return ProtocolResult(factors=None, attempts=cfg.max_attempts, status="failed",
                          diagnostics=diag, **base)


def run(cfg: ProtocolConfig, physics: Physics | None = None) -> ProtocolResult:
    if cfg.status != "ready":
        return ProtocolResult(N=cfg.N, L=cfg.L, K=cfg.K, factors=None, attempts=0, Omega=None,
                              margin=math.nan, seed=cfg.seed, mode=cfg.mode, status=cfg.status,
                              N_raw=cfg.N_raw, removed=cfg.removed)
    try:
        p = plan(cfg, physics)
    except TruncationError as exc:
        return ProtocolResult(N=cfg.N, L=cfg.L, K=cfg.K, factors=None, attempts=0, Omega=None,
                              margin=resonance_margin(cfg.N), seed=cfg.seed, mode=cfg.mode,
                              status="truncated", N_raw=cfg.N_raw, removed=cfg.removed,
                              diagnostics={"error": str(exc)})
    return execute(p, np.random.default_rng(cfg.seed))
