"""Command line: logfactor {build-potential, spectrum, factor, orbit, limits}."""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import io
from .errors import LogFactorError, ParameterError

EXIT_NONCONVERGED = 3
EXIT_PROTOCOL = 4


def _odd_L(ctx, param, value):
    if value is None:
        return value
    if value < 3 or value % 2 == 0:
        raise click.BadParameter("L must be odd and >= 3")
    return value


def _load_config(ctx, param, value):
    if value:
        with open(value) as fh:
            cfg = json.load(fh)
        # {"factor": {"N": 15}} or flat {"N": 15} applied to every command
        default_map = {}
        flat = {k.replace("-", "_"): v for k, v in cfg.items() if not isinstance(v, dict)}
        for name in ctx.command.commands:
            sub = {k.replace("-", "_"): v for k, v in cfg.get(name, {}).items()}
            default_map[name] = {**flat, **sub}
        ctx.default_map = default_map
    return value


out_option = click.option("--out", type=click.Path(file_okay=False), envvar="LOGFACTOR_OUT",
                          default=".", show_default=True, help="Output directory (env LOGFACTOR_OUT).")


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=False, help="JSON file with default option values.")
def main():
    """Log-spectrum well: potential construction, spectra, factoring runs, orbits, limits."""


def _fail_usage(exc):
    raise click.UsageError(str(exc))


@main.command("build-potential")
@click.option("--L", "L", type=int, default=3, callback=_odd_L, show_default=True)
@click.option("--m-fit", type=int, default=16, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--method", type=click.Choice(["spline", "density"]), default="spline", show_default=True)
@click.option("--xmax", type=float, default=None, help="Half-width of the grid (default: sized to m-fit).")
@click.option("--n", "n", type=int, default=None, help="Grid points (odd).")
@out_option
def build_potential(L, m_fit, tol, max_iter, method, xmax, n, out):
    """Fit the 1D well to ln(k/L + 1)."""
    from .eigensolver import Grid
    from .inverse import InversionConfig, default_grid, invert_spectrum, potential_csv
    from .spectrum import level_1d
    params = dict(L=L, m_fit=m_fit, tol=tol, max_iter=max_iter, method=method, xmax=xmax, n=n)
    try:
        cfg = InversionConfig(L, m_fit, tol, max_iter, method=method)
        grid = None
        if xmax is not None or n is not None:
            g0 = default_grid(L, m_fit)
            grid = Grid(xmax or g0.xmax, n or g0.n) if n else Grid.from_spacing(xmax, g0.h)
        rep = invert_spectrum(cfg, grid)
    except ParameterError as exc:
        _fail_usage(exc)
    out = Path(out)
    tgt = level_1d(np.arange(m_fit), L)
    levels = ["k,energy,target,error"] + [
        f"{k},{repr(float(e))},{repr(float(t))},{repr(float(e - t))}"
        for k, (e, t) in enumerate(zip(rep.energies, tgt))]
    files = [io.atomic_write_text(out / "potential.csv", potential_csv(rep)),
             io.atomic_write_text(out / "levels.csv", "\n".join(levels) + "\n"),
             io.write_json(out / "report.json", {
                 "L": L, "m_fit": m_fit, "tol": tol, "converged": rep.converged,
                 "iterations": rep.iterations, "max_error": rep.max_error,
                 "energies": rep.energies, "level_errors": rep.level_errors,
                 "grid": {"xmax": rep.potential.grid.xmax, "n": rep.potential.grid.n}})]
    io.write_manifest(out, "build-potential", params, files)
    click.echo(f"L={L} m_fit={m_fit} converged={rep.converged} max_error={rep.max_error:.3e} "
               f"iterations={rep.iterations}")
    if not rep.converged:
        sys.exit(EXIT_NONCONVERGED)


@main.command()
@click.option("--L", "L", type=int, default=3, callback=_odd_L, show_default=True)
@click.option("--ell-max", type=int, default=5, show_default=True)
@click.option("--cutoff", type=float, default=None, help="Energy cutoff (default: lowest 12 levels).")
@click.option("--m-fit", type=int, default=16, show_default=True)
@click.option("--reference/--no-reference", default=True, show_default=True,
              help="Also audit the 3D harmonic oscillator.")
@out_option
def spectrum(L, ell_max, cutoff, m_fit, reference, out):
    """(l, k, E) table of the 3D well and its degeneracy audit."""
    from .inverse import InversionConfig, invert_spectrum
    from .radial import audit_degeneracy, lift_to_3d, spectrum_csv
    params = dict(L=L, ell_max=ell_max, cutoff=cutoff, m_fit=m_fit, reference=reference)
    if ell_max < 0:
        _fail_usage("ell-max must be >= 0")
    try:
        rep = invert_spectrum(InversionConfig(L, m_fit))
    except ParameterError as exc:
        _fail_usage(exc)
    if not rep.converged:
        click.echo(f"inversion did not converge (max error {rep.max_error:.3e})", err=True)
        sys.exit(EXIT_NONCONVERGED)
    basis = lift_to_3d(rep, ell_max=ell_max)
    audit = audit_degeneracy(basis, cutoff, reference=reference)
    out = Path(out)
    files = [io.atomic_write_text(out / "spectrum.csv", spectrum_csv(audit))]
    summary = {"L": L, "K": basis.K, "min_gap": audit.min_gap, "complete": audit.complete,
               "flagged": [[(a.k, a.ell), (b.k, b.ell)] for a, b in audit.flagged]}
    if reference:
        h = audit.harmonic_reference
        files.append(io.atomic_write_text(out / "harmonic_spectrum.csv", spectrum_csv(h)))
        summary["harmonic_reference"] = {"min_gap": h.min_gap,
                                         "flagged": [[(a.k, a.ell), (b.k, b.ell)] for a, b in h.flagged]}
    files.append(io.write_json(out / "audit.json", summary))
    io.write_manifest(out, "spectrum", params, files)
    click.echo(f"levels={len(audit.levels)} min_gap={audit.min_gap:.6g}")


@main.command()
@click.option("--N", "N", type=int, required=True)
@click.option("--L", "L", type=int, default=3, callback=_odd_L, show_default=True)
@click.option("--gamma", type=float, default=None, help="Drive strength (default: Omega*N = 0.01 rwa, 0.03 full).")
@click.option("--mode", type=click.Choice(["rwa", "full"]), default="rwa", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--T", "T", type=float, default=None, help="Measurement window (default: from Omega).")
@click.option("--ell-max", type=int, default=2, show_default=True)
@click.option("--max-attempts", type=int, default=64, show_default=True)
@click.option("--m-fit", type=int, default=None, help="1D levels to fit (default: enough for N).")
@out_option
def factor(N, L, gamma, mode, seed, T, ell_max, max_attempts, m_fit, out):
    """Run the factoring protocol on N."""
    from .protocol import prepare, run
    params = dict(N=N, L=L, gamma=gamma, mode=mode, seed=seed, T=T, ell_max=ell_max,
                  max_attempts=max_attempts, m_fit=m_fit)
    try:
        cfg = prepare(N, L, gamma=gamma, T_window=T, seed=seed, mode=mode, ell_max=ell_max,
                      max_attempts=max_attempts, m_fit=m_fit)
        res = run(cfg)
    except ParameterError as exc:
        _fail_usage(exc)
    except LogFactorError as exc:
        click.echo(f"protocol error: {exc}", err=True)
        sys.exit(EXIT_PROTOCOL)
    out = Path(out)
    f = io.write_json(out / "result.json", res.to_dict())
    io.write_manifest(out, "factor", params, [f], seed=seed)
    click.echo(json.dumps({"N": N, "status": res.status,
                           "factors": list(res.factors) if res.factors else None,
                           "removed": list(res.removed), "attempts": res.attempts}))
    if not res.ok:
        sys.exit(EXIT_PROTOCOL)


@main.command()
@click.option("--energy-frac", type=float, default=None,
              help="Energy in units of V0 (default: 0.86 log, 2 harmonic, -0.3 kepler).")
@click.option("--periods", type=int, default=5, show_default=True)
@click.option("--potential", type=click.Choice(["log", "harmonic", "kepler"]), default="log",
              show_default=True)
@click.option("--L", "L", type=int, default=3, callback=_odd_L, show_default=True)
@out_option
def orbit(energy_frac, periods, potential, L, out):
    """Classical orbit and apsidal angle."""
    from .classical import (OrbitConfig, apsidal_angle, harmonic_potential, integrate_orbit,
                            kepler_potential, log_potential, precession_after)
    if energy_frac is None:
        energy_frac = {"log": 0.86, "harmonic": 2.0, "kepler": -0.3}[potential]
    params = dict(energy_frac=energy_frac, periods=periods, potential=potential, L=L)
    pot = {"log": lambda: log_potential(L), "harmonic": harmonic_potential,
           "kepler": kepler_potential}[potential]()
    try:
        tr = integrate_orbit(OrbitConfig(energy_frac, pot), periods)
    except (ParameterError, LogFactorError) as exc:
        _fail_usage(exc)
    out = Path(out)
    files = [io.atomic_write_text(out / "orbit.csv", tr.to_csv() if periods else "t,rho,theta,x,y\n")]
    info = {"potential": potential, "energy": energy_frac, "periods": periods,
            "radial_period": tr.radial_period, "energy_drift": tr.energy_drift,
            "turning_points": [[tp.t, tp.rho, tp.theta, tp.kind] for tp in tr.turning_points]}
    if periods >= 1:
        ap = apsidal_angle(tr)
        info.update(apsidal_angle=ap.angle, closed=ap.closed,
                    closure=str(ap.ratio) if ap.ratio is not None else None,
                    final_angle=precession_after(tr, periods))
    files.append(io.write_json(out / "orbit.json", info))
    io.write_manifest(out, "orbit", params, files)
    if periods >= 1:
        click.echo(f"apsidal angle = {info['apsidal_angle'] / math.pi:.6f} pi, closed={info['closed']}, "
                   f"after {periods} periods: {info['final_angle'] / math.pi:.6f} pi")
    else:
        click.echo("no periods requested")


@main.command()
@click.option("--T-dec", "T_dec", type=float, required=True, help="Decoherence time in 1/omega0.")
@click.option("--gamma-min", type=float, default=1e-6, show_default=True)
@click.option("--gamma-max", type=float, default=1.0, show_default=True)
@click.option("--num", type=int, default=61, show_default=True)
@out_option
def limits(T_dec, gamma_min, gamma_max, num, out):
    """Bound on N against drive strength for a given decoherence time."""
    from .limits import bound_table, optimal_gamma
    params = dict(T_dec=T_dec, gamma_min=gamma_min, gamma_max=gamma_max, num=num)
    if not (T_dec > 0 and 0 < gamma_min < gamma_max and num >= 2):
        _fail_usage("need T-dec > 0, 0 < gamma-min < gamma-max, num >= 2")
    tab = bound_table(T_dec, np.geomspace(gamma_min, gamma_max, num))
    lines = ["gamma,coherence,resolution,N_max"] + [",".join(repr(float(v)) for v in row) for row in tab]
    out = Path(out)
    f = io.atomic_write_text(out / "limits.csv", "\n".join(lines) + "\n")
    io.write_manifest(out, "limits", params, [f])
    g, nmax = optimal_gamma(T_dec)
    click.echo(f"optimum gamma = {g:.6g}, N_max = {nmax:.6g}")


if __name__ == "__main__":
    main()
