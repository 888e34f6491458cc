"""Command-line entry point.

Subcommands: spectrum, cauchy-table, render, approximate, tunneling, remainder.
Each reads an optional JSON config; flags override config keys.  Exit codes:
0 ok, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io
from .analysis import fit_remainder_bound, remainder_ratio, tunneling_report
from .bie import assemble, solve_steklov, trusted_mask
from .conformal import approximate_map, band_coefficients, boundary_offset, mobius_series, series_curve
from .config import RunConfig, build_curve, build_map, is_map_domain, load_config, validate
from .disk import solve_disk
from .errors import ConfigError, NoIntersection, RootInsideDisk, SteklovError
from .nodal import nodal_extract
from .reconstruction import (
    b_coefficients,
    build_field_grid,
    field_grid_from_disk,
    fourier_density,
    lambda_of,
    quadrature_size,
)

DEFAULT_N_LIST = [1, 2, 3, 4, 5, 10, 15, 20, 25, 30, 50, 75, 100, 125, 150, 175, 200]


def _out(cfg, name):
    return os.path.join(cfg.output, name)


def _disk_spectrum(cfg):
    a = band_coefficients(build_map(cfg))
    return solve_disk(a, cfg.N_tr, cfg.sigma_target)


def _bie_spectrum(cfg, curve):
    sp = solve_steklov(assemble(curve, cfg.n_nodes), "regularized", cfg.n_keep)
    trusted = trusted_mask(curve, cfg.n_nodes, sp.sigma)
    return sp, trusted


def _disk_residuals(ds):
    from .disk import assemble_pencil

    D, A = assemble_pencil(ds.band, ds.N_tr)
    U = ds.uhat
    r = np.linalg.norm(D @ U - (A @ U) * ds.sigma[None, :], axis=0)
    return r / (np.linalg.norm(D, np.inf) + ds.sigma * np.linalg.norm(A, np.inf))


RECONCILE_TOL = 5e-4


def reconcile(sigma, expect, stream=None):
    """Report expected labels that miss the computed list, with the three nearest eigenvalues.

    Returns the list of mismatched indices.
    """
    stream = stream or sys.stderr
    sigma = np.asarray(sigma)
    bad = []
    for j, want in sorted((expect or {}).items()):
        if j < len(sigma) and abs(sigma[j] - want) <= RECONCILE_TOL:
            continue
        bad.append(j)
        near = np.argsort(np.abs(sigma - want), kind="stable")[:3]
        cand = ", ".join(f"sigma_{int(i)}={io.fmt(sigma[i])}" for i in sorted(near))
        print(f"reconcile: expected sigma_{j}={io.fmt(want)}; nearest: {cand}", file=stream)
    return bad


def run_spectrum(cfg: RunConfig):
    paths = []
    if cfg.solver in ("disk", "both"):
        ds = _disk_spectrum(cfg)
        n = len(ds.sigma) if cfg.n_keep is None else min(cfg.n_keep, len(ds.sigma))
        res = _disk_residuals(ds)
        rows = [(j, ds.sigma[j], res[j], bool(j <= ds.j_max)) for j in range(n)]
        p = _out(cfg, "spectrum.csv")
        io.write_csv(p, ("j", "sigma", "residual", "trusted"), rows)
        paths.append(p)
        coef = [(k, ds.uhat[ds.N_tr + k, cfg.j].real, ds.uhat[ds.N_tr + k, cfg.j].imag) for k in range(-ds.N_tr, ds.N_tr + 1)]
        p = _out(cfg, f"coefficients_{cfg.j}.csv")
        io.write_csv(p, ("k", "re_uhat", "im_uhat"), coef)
        paths.append(p)
    if cfg.solver in ("bie", "both"):
        curve = build_curve(cfg)
        sp, trusted = _bie_spectrum(cfg, curve)
        if cfg.solver == "bie":
            rows = [(j, sp.sigma[j], sp.residuals[j], bool(trusted[j])) for j in range(len(sp.sigma))]
            p = _out(cfg, "spectrum.csv")
            io.write_csv(p, ("j", "sigma", "residual", "trusted"), rows)
        else:
            k = min(len(sp.sigma), n)
            rows = [
                (j, sp.sigma[j], ds.sigma[j], abs(sp.sigma[j] - ds.sigma[j]), bool(trusted[j] and j <= ds.j_max))
                for j in range(k)
            ]
            p = _out(cfg, "compare.csv")
            io.write_csv(p, ("j", "sigma_bie", "sigma_disk", "abs_diff", "trusted"), rows)
        paths.append(p)
        reconcile(sp.sigma, cfg.expect)
    if cfg.solver == "disk":
        reconcile(ds.sigma, cfg.expect)
    return paths


def run_cauchy_table(cfg: RunConfig):
    curve = build_curve(cfg)
    if cfg.point is None:
        _, x, y, *_ = curve.samples(256)
        point = (float(np.mean(x)), float(np.mean(y)))
    else:
        point = tuple(map(float, cfg.point))
    n_list = sorted(cfg.n_list or DEFAULT_N_LIST)
    n_max = max(n_list)
    lam = lambda_of(curve, point).lam
    s = cfg.alpha * lam
    B0 = b_coefficients(curve, point, 0.0, n_max, quadrature_size(n_max, lam))
    Bs = b_coefficients(curve, point, s, n_max, quadrature_size(n_max, lam - s))
    rows = []
    for n in n_list:
        b0 = B0[n - 1]
        sh = np.exp(-n * s) * Bs[n - 1]
        err = abs(b0 - sh)
        rows.append((n, abs(b0), abs(sh), err, err / abs(b0) if b0 != 0 else np.inf))
    p = _out(cfg, "cauchy.csv")
    io.write_csv(p, ("n", "abs_B0", "abs_shifted", "abs_error", "rel_error"), rows)
    return [p]


def _default_box(curve):
    _, x, y, *_ = curve.samples(512)
    cx, cy = (x.max() + x.min()) / 2, (y.max() + y.min()) / 2
    half = 0.525 * max(x.max() - x.min(), y.max() - y.min())
    return (cx - half, cx + half, cy - half, cy + half)


def run_render(cfg: RunConfig):
    curve = build_curve(cfg)
    box = tuple(cfg.grid.box) if cfg.grid.box is not None else _default_box(curve)
    if cfg.solver == "disk":
        fmap = build_map(cfg)
        ds = _disk_spectrum(cfg)
        grid = field_grid_from_disk(fmap, ds.uhat[:, cfg.j], box, cfg.grid.resolution)
    else:
        sp = solve_steklov(assemble(curve, cfg.n_nodes), "regularized")
        if cfg.j >= len(sp.sigma):
            raise ConfigError(f"eigen index {cfg.j} exceeds the {len(sp.sigma)} computed eigenpairs")
        dens = fourier_density(sp.densities[:, cfg.j], curve)
        grid = build_field_grid(curve, dens, box, cfg.grid.resolution, cfg.alpha)
    lines = nodal_extract(grid)
    paths = [_out(cfg, f"sign_{cfg.j}.pgm"), _out(cfg, f"nodal_{cfg.j}.svg"), _out(cfg, f"grid_{cfg.j}.csv")]
    io.write_pgm(paths[0], grid.sign)
    io.write_svg(paths[1], lines, box)
    io.write_csv(paths[2], io.GRID_HEADER, io.grid_rows(grid))
    return paths


def run_approximate(cfg: RunConfig):
    ap = cfg.approximate
    target = mobius_series(ap.a, ap.order)
    tcurve = series_curve(target)
    rows = []
    for N in ap.N:
        try:
            fmap = approximate_map(target, int(N))
        except RootInsideDisk:
            rows.append((int(N), np.nan, np.nan, False))
            continue
        try:
            off = boundary_offset(tcurve, fmap.boundary_curve())
            rows.append((int(N), off.sup_s, off.sup_ds, True))
        except NoIntersection:
            rows.append((int(N), np.nan, np.nan, True))
    p = _out(cfg, "approximate.csv")
    io.write_csv(p, ("N", "sup_s", "max_ds", "certified"), rows)
    return [p]


def _require_map(cfg):
    if not is_map_domain(cfg):
        raise ConfigError("this subcommand needs a band-limited map domain (preset rfe/disk or 'map')")


def run_tunneling(cfg: RunConfig):
    _require_map(cfg)
    ds = _disk_spectrum(cfg)
    an = cfg.analysis
    rep = tunneling_report(ds, an.m_center, an.K, an.sigma_max)
    rows = [(j, e.sigma, e.A_m, e.C0, e.C_low) for j, e in zip(rep.indices, rep.entries)]
    p = _out(cfg, "tunneling.csv")
    io.write_csv(p, ("j", "sigma", f"A_{an.m_center}", "C0", "C_low"), rows)
    return [p]


def run_remainder(cfg: RunConfig):
    _require_map(cfg)
    ds = _disk_spectrum(cfg)
    an = cfg.analysis
    m0 = ds.band.m0
    ms = an.m if an.m is not None else list(range(m0 + 2, m0 + 9))
    smax = an.sigma_max if an.sigma_max is not None else cfg.sigma_target
    entries = []
    for j in range(1, ds.j_max + 1):
        if ds.sigma[j] > smax:
            break
        for dl in an.delta:
            for m in ms:
                entries.append(remainder_ratio(ds.uhat[:, j], ds.sigma[j], dl, int(m), an.N, m0))
    fit_remainder_bound(entries, m0)
    rows = [(e.sigma, e.delta, e.m, e.N, e.ratio, e.bound) for e in entries]
    p = _out(cfg, "remainder.csv")
    io.write_csv(p, ("sigma", "delta", "m", "N", "ratio", "bound"), rows)
    return [p]


COMMANDS = {
    "spectrum": run_spectrum,
    "cauchy-table": run_cauchy_table,
    "render": run_render,
    "approximate": run_approximate,
    "tunneling": run_tunneling,
    "remainder": run_remainder,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="steklov", description="Steklov eigenproblems on analytic planar domains.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", dest="output", help="output directory")
        p.add_argument("--preset", choices=["circle", "ellipse", "kite", "rfe", "disk"])
        p.add_argument("--params", help="preset parameters as JSON (list, or object for rfe)")
        p.add_argument("--solver", choices=["bie", "disk", "both"])
        p.add_argument("--n-nodes", dest="n_nodes", type=int)
        p.add_argument("--N-tr", dest="N_tr", type=int)
        p.add_argument("--n-keep", dest="n_keep", type=int)
        p.add_argument("--sigma-target", dest="sigma_target", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--j", type=int, help="eigen index (0-based, with multiplicity)")
        p.add_argument("--point", type=float, nargs=2)
        p.add_argument("--n-list", dest="n_list", type=int, nargs="+")
        p.add_argument("--box", type=float, nargs=4)
        p.add_argument("--resolution", type=int)
        p.add_argument("--delta", type=float, nargs="+")
        p.add_argument("--m", type=int, nargs="+")
        p.add_argument("--N", type=int, nargs="+", help="analysis order (remainder) or truncation list (approximate)")
        p.add_argument("--K", type=float)
        p.add_argument("--sigma-max", dest="sigma_max", type=float)
        p.add_argument("--a", type=float, help="Mobius parameter for approximate")
        p.add_argument("--expect", nargs="+", metavar="J=SIGMA", help="labelled eigenvalues to reconcile (spectrum)")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.preset:
        params = json.loads(args.params) if args.params else ([] if args.preset != "rfe" else {})
        cfg.domain = {"preset": args.preset, "params": params}
    for key in ("output", "solver", "n_nodes", "N_tr", "n_keep", "sigma_target", "alpha", "j", "point", "n_list"):
        v = getattr(args, key)
        if v is not None:
            setattr(cfg, key, v)
    if args.box is not None:
        cfg.grid.box = tuple(args.box)
    if args.resolution is not None:
        cfg.grid.resolution = args.resolution
    for key in ("delta", "m", "K", "sigma_max"):
        v = getattr(args, key)
        if v is not None:
            setattr(cfg.analysis, key, v)
    if args.N is not None:
        if args.command == "approximate":
            cfg.approximate.N = args.N
        else:
            cfg.analysis.N = args.N[0]
    if args.a is not None:
        cfg.approximate.a = args.a
    if args.expect:
        try:
            cfg.expect = dict(kv.split("=", 1) for kv in args.expect)
        except ValueError as exc:
            raise ConfigError("--expect entries must look like J=SIGMA") from exc
    return validate(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        paths = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except json.JSONDecodeError as exc:
        print(f"error: ConfigError: --params is not valid JSON: {exc}", file=sys.stderr)
        return 2
    except SteklovError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: LinAlgError: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
