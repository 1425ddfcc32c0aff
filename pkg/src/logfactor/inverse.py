"""Reconstruct a symmetric 1D potential from a prescribed low-lying spectrum.

The default ("spline") method parametrizes V as a cubic B-spline in
s = ln(1 + xi^2) on top of a harmonic starting guess and takes Gauss-Newton
steps whose Jacobian comes from Hellmann-Feynman, dE_k/dV(xi) = u_k(xi)^2.
Among all corrections that fix the level errors to first order it picks the
smoothest one.  A continuation in the log-family
    E_k(beta) ~ ln(1 + beta k / L) / ln(1 + beta / L)
carries the nearly equidistant (harmonic) spectrum at small beta to the
logarithmic target at beta = 1.

The plain density-weighted update (`hf_update`) is kept as the "density"
method; it converges, but linearly and slowly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import solve

from .eigensolver import (EigenPair, Grid, PotentialOnGrid, _check_bound, lowest_arrays,
                          symmetrize)
from .errors import DomainTruncationError, ParameterError
from .spectrum import check_L, level_1d

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class InversionConfig:
    L: int
    m_fit: int = 16
    tol: float = 1e-8
    max_iter: int = 500
    damping: float = 0.5
    method: str = "spline"

    def __post_init__(self):
        check_L(self.L)
        if int(self.m_fit) != self.m_fit or self.m_fit < 2:
            raise ParameterError("m_fit must be an integer >= 2")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if not 0 < self.damping <= 1:
            raise ParameterError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")
        if self.method not in ("spline", "density"):
            raise ParameterError(f"unknown method {self.method!r}")


@dataclass(eq=False)
class InversionReport:
    potential: PotentialOnGrid
    level_errors: np.ndarray
    iterations: int
    converged: bool
    energies: np.ndarray
    config: InversionConfig
    history: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return self.config.L

    @property
    def max_error(self) -> float:
        return float(np.abs(self.level_errors).max())


def default_grid(L: int, m_fit: int, h: float = 0.05) -> Grid:
    """Box large enough that the top fitted level sits >1 unit below the edge.

    The reconstructed potential only grows like ln(xi), so the box has to
    scale roughly with the level count.
    """
    xmax = max(40.0, 20.0 * (m_fit - 1 + L) / L)
    return Grid.from_spacing(math.ceil(xmax), h)


def hf_update(current: PotentialOnGrid, pairs: list[EigenPair], targets, damping: float) -> PotentialOnGrid:
    """One density-weighted first-order correction, then symmetrization."""
    targets = np.asarray(targets, dtype=float)
    if len(pairs) != targets.size:
        raise ParameterError("need one target per eigenpair")
    U = np.column_stack([p.wavefunction for p in pairs])
    E = np.array([p.energy for p in pairs])
    dens = U**2
    rho = dens.sum(axis=1)
    rho = rho + EPS_FLOOR * rho.max()
    dV = damping * (dens @ (targets - E)) / rho
    return PotentialOnGrid(current.grid, symmetrize(current.values + dV))


def _initial_guess(grid: Grid, omega: float, m: int):
    """Harmonic well inside the occupied region, continued linearly in s = ln(1+xi^2) outside."""
    x = grid.x
    V = 0.5 * omega**2 * x**2
    _, U = lowest_arrays(V, grid.h, m, check_edge=False)
    rho = (U**2).sum(axis=1)[grid.mid:]
    edge = np.nonzero(rho >= EPS_FLOOR * rho.max())[0][-1]
    s_c = math.log1p(grid.r[edge] ** 2)

    def v_of_s(s):
        inner = 0.5 * omega**2 * np.expm1(np.minimum(s, s_c))
        outer = 0.5 * omega**2 * (math.expm1(s_c) + math.exp(s_c) * (s - s_c))
        return np.where(s <= s_c, inner, outer)

    return v_of_s


class _SplineFit:
    def __init__(self, grid: Grid, v_of_s, m: int):
        self.h = grid.h
        self.m = m
        s = np.log1p(grid.x**2)
        smax = s[-1]
        nk = max(40, 4 * m)
        t = np.r_[[0.0] * 3, np.linspace(0, smax, nk + 1), [smax] * 3]
        self.B = BSpline.design_matrix(s, t, 3).toarray()
        nb = self.B.shape[1]
        sr = np.linspace(0, smax, max(800, 4 * nb))
        Br = BSpline.design_matrix(sr, t, 3).toarray()
        D2 = np.diff(np.eye(sr.size), 2, axis=0) / (sr[1] - sr[0]) ** 2
        self.RB = D2 @ Br
        self.v0_rough = D2 @ v_of_s(sr)
        Q = self.RB.T @ self.RB
        self.Q = Q + 1e-10 * np.trace(Q) / nb * np.eye(nb)
        self.V0 = v_of_s(s)
        self.nb = nb

    def evaluate(self, c, tgt):
        V = self.V0 + self.B @ c
        w, U = lowest_arrays(V, self.h, self.m, check_edge=False)
        return V, w, U, tgt - (w - w[0])

    def step(self, c, U, r, smooth):
        J = self.h * ((U**2).T @ self.B)
        G = J[1:] - J[0]
        QiG = solve(self.Q, G.T, assume_a="pos")
        S = G @ QiG
        if smooth:
            g = self.RB.T @ (self.v0_rough + self.RB @ c)
            Qig = solve(self.Q, g, assume_a="pos")
            return QiG @ np.linalg.solve(S, r[1:] + G @ Qig) - Qig
        return QiG @ np.linalg.solve(S, r[1:])

    def newton(self, c, tgt, tol, maxit, history, accept=0.0):
        """Damped Gauss-Newton on one target set.

        Returns ((c, V, w, err) or None, iterations used).  A stalled run still
        counts as success when its residual is below `accept`.
        """
        V, w, U, r = self.evaluate(c, tgt)
        err = np.abs(r).max()
        its = 0
        while err > tol:
            if its >= maxit:
                return None, its
            accepted = None
            for smooth, floor in ((True, 0.25), (False, 1e-3)):
                dc = self.step(c, U, r, smooth)
                a = 1.0
                while a >= floor:
                    trial = self.evaluate(c + a * dc, tgt)
                    if np.abs(trial[3]).max() < err:
                        accepted = (c + a * dc,) + trial
                        break
                    a *= 0.5
                if accepted:
                    break
            if accepted is None:
                return ((c, V, w, err) if err <= accept else None), its
            c, V, w, U, r = accepted
            err = np.abs(r).max()
            its += 1
            history.append(float(err))
        return (c, V, w, err), its


def _log_family(L, m):
    k = np.arange(m)
    om = math.log1p(1 / L)

    def at(beta):
        return om * np.log1p(beta * k / L) / math.log1p(beta / L)
    return at


def _invert_spline(cfg, grid, targets, history, omega):
    m = cfg.m_fit
    fit = _SplineFit(grid, _initial_guess(grid, omega, m), m)
    c = np.zeros(fit.nb)
    V, w, _, r = fit.evaluate(c, targets)
    if np.abs(r).max() <= cfg.tol:
        return (V, w), 0
    total = 0
    final_tol = cfg.tol * 1e-2
    is_log = np.allclose(targets, level_1d(np.arange(m), cfg.L), rtol=0, atol=1e-15)
    if is_log:
        family = _log_family(cfg.L, m)
        lb, lb_end, step = math.log(1e-3), 0.0, -math.log(1e-3) / 8
        path = lambda lbeta: family(math.exp(lbeta))
    else:
        # straight-line continuation from the starting spectrum
        _, w0, _, _ = fit.evaluate(c, targets)
        e0 = w0 - w0[0]
        lb, lb_end, step = 0.0, 1.0, 1.0
        path = lambda tau: (1 - tau) * e0 + tau * targets

    res, total = fit.newton(c, path(lb), 1e-4, 20, history)
    if res is None:
        return None, total
    c = res[0]
    while total < cfg.max_iter:
        nxt = min(lb + step, lb_end)
        final = nxt == lb_end
        if final:
            res, its = fit.newton(c, path(nxt), final_tol, cfg.max_iter - total, history, cfg.tol)
        else:
            res, its = fit.newton(c, path(nxt), 1e-4, 20, history)
        total += its
        if res is None:
            step /= 2
            if step < 1e-4:
                break
            continue
        c, V, w, err = res
        lb = nxt
        step *= 1.5
        if final:
            return (V, w), total
    V, w, _, _ = fit.evaluate(c, targets)
    return (V, w), total


def _invert_density(cfg, grid, targets, history, omega):
    pot = PotentialOnGrid(grid, symmetrize(_initial_guess(grid, omega, cfg.m_fit)(np.log1p(grid.x**2))))
    its = 0
    while True:
        w, U = lowest_arrays(pot.values, grid.h, cfg.m_fit, check_edge=False)
        err = np.abs(targets - (w - w[0])).max()
        if its:
            history.append(float(err))
        if err <= cfg.tol or its >= cfg.max_iter:
            return (pot.values, w), its
        pairs = [EigenPair(w[k], U[:, k], k) for k in range(cfg.m_fit)]
        pot = hf_update(pot, pairs, targets + w[0], cfg.damping)
        its += 1


def invert_spectrum(cfg: InversionConfig, grid: Grid | None = None, targets=None,
                    omega: float | None = None) -> InversionReport:
    """Potential whose lowest m_fit levels (ground shifted to 0) match `targets`.

    `targets` defaults to ln(k/L + 1).  The starting well is harmonic with
    frequency `omega`, by default the first target gap.  Non-convergence is reported, not raised;
    a top level that is not bound inside the box raises DomainTruncationError.
    """
    m = cfg.m_fit
    if grid is None:
        # the far tail of the fit is weakly constrained; widen the box until bound
        grid = default_grid(cfg.L, m)
        for _ in range(3):
            try:
                return invert_spectrum(cfg, grid, targets, omega)
            except DomainTruncationError:
                grid = Grid.from_spacing(math.ceil(1.6 * grid.xmax), grid.h)
    if targets is None:
        targets = level_1d(np.arange(m), cfg.L)
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (m,) or targets[0] != 0 or np.any(np.diff(targets) <= 0):
        raise ParameterError("targets must be m_fit increasing values starting at 0")
    if omega is None:
        omega = targets[1] - targets[0]
    history: list = []
    run = _invert_spline if cfg.method == "spline" else _invert_density
    out, its = run(cfg, grid, targets, history, omega)
    if out is None:
        V = symmetrize(_initial_guess(grid, omega, m)(np.log1p(grid.x**2)))
    else:
        V = symmetrize(out[0])
    # gauge: ground level exactly at zero, energies from a fresh solve
    w, _ = lowest_arrays(V, grid.h, m, check_edge=False)
    V = V - w[0]
    w, _ = lowest_arrays(V, grid.h, m, check_edge=False)
    _check_bound(w, min(V[0], V[-1]))
    errors = w - targets
    converged = bool(np.abs(errors).max() <= cfg.tol)
    return InversionReport(PotentialOnGrid(grid, V), errors, its, converged, w, cfg, history)


def export_csv(report: InversionReport, path) -> None:
    from .io import atomic_write_text
    atomic_write_text(path, potential_csv(report))


def potential_csv(report: InversionReport) -> str:
    g = report.potential.grid
    meta = {"L": report.L, "xmax": g.xmax, "n": g.n, "tol": report.config.tol,
            "m_fit": report.config.m_fit, "iterations": report.iterations,
            "converged": report.converged, "method": report.config.method}
    lines = ["# " + json.dumps(meta, sort_keys=True), "xi,V"]
    lines += [f"{repr(float(a))},{repr(float(b))}" for a, b in zip(g.x, report.potential.values)]
    return "\n".join(lines) + "\n"


def import_csv(path) -> tuple[PotentialOnGrid, dict]:
    with open(path) as fh:
        head = fh.readline()
        if not head.startswith("# "):
            raise ParameterError("missing JSON header line")
        meta = json.loads(head[2:])
        fh.readline()
        vals = [float(line.split(",")[1]) for line in fh if line.strip()]
    grid = Grid(meta["xmax"], meta["n"])
    return PotentialOnGrid(grid, np.array(vals)), meta
