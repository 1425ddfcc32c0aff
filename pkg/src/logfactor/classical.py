"""Classical motion in a central potential and its apsidal precession.

Units mu = V0 = J = 1, so V_eff(rho) = 1/(2 rho^2) + v(rho).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq, minimize_scalar

from .errors import IntegratorAccuracyError, NoMotionError, ParameterError

DRIFT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CentralPotential:
    v: object
    dv: object
    r_max: float
    name: str = "custom"


def harmonic_potential() -> CentralPotential:
    return CentralPotential(lambda r: 0.5 * r * r, lambda r: r, 1e3, "harmonic")


def kepler_potential() -> CentralPotential:
    return CentralPotential(lambda r: -1.0 / r, lambda r: 1.0 / (r * r), 1e3, "kepler")


def grid_potential(r: np.ndarray, values: np.ndarray, name: str = "grid", k: int = 5) -> CentralPotential:
    """Smooth interpolant of a grid potential.

    Quintic by default: with a cubic (C^2) interpolant the adaptive integrator
    drifts in energy at the 1e-7 level over tens of periods.
    """
    spl = make_interp_spline(r, values, k=k)
    d = spl.derivative()
    return CentralPotential(lambda x: float(spl(x)), lambda x: float(d(x)), float(r[-1]), name)


def log_potential(L: int = 3, m_fit: int = 16) -> CentralPotential:
    """The reconstructed 3D well (s-ground at zero) read as v(rho)."""
    from .protocol import build_physics
    b = build_physics(L, m_fit).basis
    r = b.r
    keep = r <= min(r[-1], 60.0)  # orbits of interest stay well inside
    return grid_potential(r[keep], b.potential.values[b.grid.mid:][keep], f"log-L{L}")


@dataclass(frozen=True, eq=False)
class OrbitConfig:
    energy: float = 0.86
    potential: CentralPotential | None = None
    samples_per_period: int = 200
    rtol: float = 1e-12


@dataclass(frozen=True)
class TurningPoint:
    t: float
    rho: float
    theta: float
    kind: str   # "inner" | "outer"


@dataclass(eq=False)
class OrbitTrace:
    t: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    turning_points: list
    energy: float
    energy_drift: float
    J_drift: float
    radial_period: float
    potential_name: str = ""

    @property
    def inner(self):
        return [tp for tp in self.turning_points if tp.kind == "inner"]

    def to_csv(self) -> str:
        lines = ["t,rho,theta,x,y"]
        for t, r, th in zip(self.t, self.rho, self.theta):
            lines.append(",".join(repr(float(v)) for v in (t, r, th, r * math.cos(th), r * math.sin(th))))
        return "\n".join(lines) + "\n"


def turning_radii(pot: CentralPotential, E: float) -> tuple[float, float]:
    veff = lambda r: 0.5 / r**2 + pot.v(r)
    lo, hi = 1e-6, pot.r_max
    # V_eff has a single minimum for the confining potentials used here
    res = minimize_scalar(lambda lr: veff(math.exp(lr)), bounds=(math.log(lo), math.log(hi)),
                          method="bounded", options={"xatol": 1e-12})
    r_min = math.exp(res.x)
    if E <= veff(r_min):
        raise NoMotionError(f"energy {E} is below the effective minimum {veff(r_min):.6g}")
    if veff(hi) <= E:
        raise ParameterError(f"energy {E} reaches the edge of the potential domain")
    f = lambda r: veff(r) - E
    return brentq(f, lo, r_min, xtol=1e-15, rtol=1e-15), brentq(f, r_min, hi, xtol=1e-15, rtol=1e-15)


def integrate_orbit(cfg: OrbitConfig, periods: int) -> OrbitTrace:
    """Start at the inner turning point on the x axis and follow `periods` radial periods."""
    if periods < 0 or int(periods) != periods:
        raise ParameterError("periods must be a non-negative integer")
    pot = cfg.potential or log_potential()
    E = cfg.energy
    r1, r2 = turning_radii(pot, E)

    def rhs(t, y):
        x, yy, vx, vy, th = y
        r = math.hypot(x, yy)
        a = -pot.dv(r) / r
        return [vx, vy, a * x, a * yy, (x * vy - yy * vx) / (r * r)]

    def radial(t, y):
        return y[0] * y[2] + y[1] * y[3]

    y0 = [r1, 0.0, 0.0, 1.0 / r1, 0.0]   # J = r1 * v_theta = 1
    kw = dict(method="DOP853", rtol=cfg.rtol, atol=cfg.rtol * 1e-2)

    # one half period first: it sets the time scale of the full run
    outer = lambda t, y: radial(t, y)
    outer.terminal, outer.direction = True, -1
    half = solve_ivp(rhs, (0, 1e7), y0, events=outer, **kw)
    if not half.t_events[0].size:
        raise ParameterError("no outer turning point found")
    T_r = 2 * half.t_events[0][0]

    if periods == 0:
        return OrbitTrace(np.array([0.0]), np.array([r1]), np.array([0.0]),
                          [TurningPoint(0.0, r1, 0.0, "inner")], E, 0.0, 0.0, T_r, pot.name)

    radial.terminal, radial.direction = False, 0
    t_end = (periods + 0.25) * T_r
    n_s = periods * cfg.samples_per_period + 1
    t_eval = np.linspace(0, periods * T_r, n_s)
    sol = solve_ivp(rhs, (0, t_end), y0, events=radial, t_eval=t_eval, dense_output=True, **kw)
    if sol.status != 0:
        raise IntegratorAccuracyError(sol.message)

    tps = [TurningPoint(0.0, r1, 0.0, "inner")]
    for t, y in zip(sol.t_events[0], sol.y_events[0]):
        if t < 1e-6 * T_r:
            continue
        r = math.hypot(y[0], y[1])
        kind = "inner" if abs(r - r1) < abs(r - r2) else "outer"
        tps.append(TurningPoint(float(t), r, float(y[4]), kind))
    n_inner = sum(tp.kind == "inner" for tp in tps)
    tps = [tp for tp in tps if tp.t <= tps[-1].t]
    # keep exactly `periods` radial periods
    inner_seen = 0
    kept = []
    for tp in tps:
        if tp.kind == "inner":
            inner_seen += 1
            if inner_seen > periods + 1:
                break
        kept.append(tp)
    if n_inner < periods + 1:
        raise IntegratorAccuracyError("missed inner turning points")

    x, yy, vx, vy, th = sol.y
    r = np.hypot(x, yy)
    Et = 0.5 * (vx**2 + vy**2) + np.array([pot.v(ri) for ri in r])
    J = x * vy - yy * vx
    e_drift = float(np.abs(Et - E).max() / abs(E)) if E else float(np.abs(Et - E).max())
    j_drift = float(np.abs(J - 1).max())
    if e_drift > DRIFT_TOL or j_drift > DRIFT_TOL:
        raise IntegratorAccuracyError(f"energy drift {e_drift:.3g}, J drift {j_drift:.3g}")
    return OrbitTrace(sol.t, r, th, kept, E, e_drift, j_drift, T_r, pot.name)


@dataclass(frozen=True)
class ApsidalResult:
    angle: float
    closed: bool
    ratio: Fraction | None


def closure_ratio(angle: float, tol: float = 1e-4, max_den: int = 8) -> Fraction | None:
    """a/b with b <= max_den such that angle = 2 pi a/b within tol, if any."""
    x = angle / (2 * math.pi)
    for b in range(1, max_den + 1):
        a = round(x * b)
        if abs(angle - 2 * math.pi * a / b) <= tol:
            return Fraction(a, b)
    return None


def apsidal_angle(trace: OrbitTrace, tol: float = 1e-4, max_den: int = 8) -> ApsidalResult:
    """Mean angle swept between consecutive inner turning points."""
    inner = trace.inner
    if len(inner) < 2:
        raise ParameterError("need at least two inner turning points")
    th = np.array([tp.theta for tp in inner])
    angle = float(np.mean(np.diff(th)))
    ratio = closure_ratio(angle, tol, max_den)
    return ApsidalResult(angle, ratio is not None, ratio)


def precession_after(trace: OrbitTrace, periods: int = 5) -> float:
    """Angle of the inner turning point after `periods` radial periods, mod 2 pi."""
    inner = trace.inner
    if len(inner) <= periods:
        raise ParameterError(f"trace has only {len(inner) - 1} periods")
    return float(inner[periods].theta % (2 * math.pi))
