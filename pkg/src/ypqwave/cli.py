"""Batch command-line surface.

Subcommands: geometry, angular, radial, spectrum, ads-modes, propagate,
selftest.  Exit codes: 0 success, 1 numerical failure (stderr lines are
prefixed `error:`), 2 usage error.  CSV output carries a header row and
RFC-style quoting; JSON output keeps a stable field order.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import selftest as _selftest
from .angular import angular_mode
from .ads import ModeIndex, Sector, SpectralCoefficients, ads_radial_mode
from .cache import SOLVER_VERSION, CacheKey, cache_get_or_solve
from .config import load_config
from .errors import YpqError
from .geometry import solve_geometry
from .propagator import CauchyData, KGPropagator, TruncationSpec
from .radial import radial_problem, solve_radial
from .shooting import shooting_oracle
from .specfun import jacobi_poly, rule_on_01
from .spectrum import TruncationPolicy, build_modes, enumerate_modes

__all__ = ["run", "main"]


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _geometry_json(gp) -> str:
    items = [f'"p": {gp.p}', f'"q": {gp.q}']
    for name in ("a", "y_minus", "y_plus", "tau"):
        items.append(f'"{name}": {_fmt17(getattr(gp, name))}')
    items.append(f'"sigma": {gp.sigma}')
    return "{" + ", ".join(items) + "}"


def _write_rows(rows, header, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        out.write(json.dumps(payload, indent=1) + "\n")
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_geometry(args) -> int:
    gp = solve_geometry(args.p, args.q, args.sigma_rule)
    if args.json:
        print(_geometry_json(gp))
    else:
        for key, val in gp.as_dict().items():
            print(f"{key} = {_fmt17(val) if isinstance(val, float) else val}")
    return 0


def _cmd_angular(args) -> int:
    rows = []
    for j in range(args.jmax + 1):
        md = angular_mode(args.n, args.m, j)
        rows.append((j, md.lambda_cap, md.norm_const))
    _write_rows(rows, ("j", "lambda", "norm_const"), args.format)
    return 0


def _cmd_radial(args) -> int:
    gp = solve_geometry(args.p, args.q, args.sigma_rule)
    prob = radial_problem(gp, args.m, args.l, args.Lambda)
    modes = solve_radial(prob, args.kmax, max(args.nbasis, args.kmax + 8))
    print("# eigenvalues are ell of -S (the operator is nonpositive; "
          "its spectrum is -ell)")
    rows = []
    for md in modes:
        row = [md.k, md.ell, md.grid_norm_residual]
        if args.oracle:
            pad = 0.03 * max(1.0, abs(md.ell))
            row.append(shooting_oracle(prob, (md.ell - pad, md.ell + pad),
                                       md.k))
        rows.append(tuple(row))
    header = ("k", "ell", "norm_residual") + (("oracle_ell",) if args.oracle else ())
    _write_rows(rows, header, args.format)
    return 0


def _cmd_spectrum(args) -> int:
    gp = solve_geometry(args.p, args.q, args.sigma_rule)
    policy = TruncationPolicy(args.nmax, args.mmax, args.lmax, args.kmax,
                              args.jmax, args.lambda_max)
    modes = build_modes(gp, enumerate_modes(gp, policy), args.nbasis)
    if args.lambda_max is not None:
        modes = [md for md in modes if md.lam <= args.lambda_max]
    rows = [(md.lam, md.index.n, md.index.m, md.index.l, md.index.k,
             md.index.j) for md in modes]
    _write_rows(rows, ("lambda", "n", "m", "l", "k", "j"), args.format)
    return 0


def _cmd_ads_modes(args) -> int:
    xi, w = rule_on_01(args.beta1 + 1.0, args.c, args.imax + 6)
    rows = []
    for i in range(args.imax + 1):
        md = ads_radial_mode(args.beta1, args.c, i)
        vals = md.norm_const * jacobi_poly(args.beta1 + 1.0, args.c, i,
                                           1.0 - 2.0 * xi)
        norm_resid = abs(float(np.dot(w, vals * vals)) - 1.0)
        rows.append((i, md.omega, norm_resid))
    _write_rows(rows, ("i", "omega", "norm_residual"), args.format)
    return 0


def _cmd_propagate(args) -> int:
    cfg = load_config(args.config)
    gp = solve_geometry(cfg.p, cfg.q, cfg.sigma_rule)
    trunc = TruncationSpec(
        s1_max=cfg.s1_max, n_max=cfg.n_max, m_max=cfg.m_max, l_max=cfg.l_max,
        k_max=cfg.k_max, j_max=cfg.j_max, i_max=cfg.i_max,
        n_basis=cfg.n_basis, grid_shape=cfg.grid_shape,
        tail_warn_fraction=cfg.tail_warn_fraction)
    solver = None
    cache_dir = os.environ.get("YPQWAVE_CACHE_DIR") or cfg.cache_dir
    if cache_dir:

        def solver(prob, k_max, n_basis):
            key = CacheKey(p=cfg.p, q=cfg.q, sigma_rule=cfg.sigma_rule,
                           m=prob.m, l=prob.l, lambda_cap=prob.lambda_cap,
                           n_basis=n_basis, solver_version=SOLVER_VERSION)
            return cache_get_or_solve(
                key, lambda: solve_radial(prob, k_max, n_basis),
                cache_dir, min_modes=k_max + 1)

    prop = KGPropagator(gp, cfg.M, cfg.kappa, trunc, radial_solver=solver)
    data = _build_data(cfg, prop)
    os.makedirs(cfg.out_dir, exist_ok=True)
    energy_rows = []
    for t in cfg.times:
        sample = prop.evolve(data, t, synthesize_values=True)
        _write_sample(cfg, prop, sample)
        for (beta, i), e in sorted(sample.per_mode_energy.items()):
            energy_rows.append(beta.beta + (i, t, e))
        print(f"t={t:g}: wrote field sample, tail norm {sample.tail_norm:.3e}")
    path = os.path.join(cfg.out_dir, "energy_trace.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("s1", "s2", "s3", "n", "m", "l", "k", "j", "i",
                         "t", "energy"))
        writer.writerows(energy_rows)
    print(f"energy trace: {path}")
    return 0


def _build_data(cfg, prop: KGPropagator) -> CauchyData:
    if cfg.preset == "none":
        a0, a1 = SpectralCoefficients(), SpectralCoefficients()
        for target, coefs in ((a0, cfg.phi0_coefs), (a1, cfg.phi1_coefs)):
            for idx, val in coefs:
                beta = ModeIndex(*idx[:8])
                target[(beta, idx[8])] = val
        return CauchyData(a0, a1)
    # gaussian_x: a bump in the AdS radial coordinate on the constant
    # angular sector, sampled on the grid (projection happens inside)
    sector = Sector(0, 0, 0, 0)
    grid = prop.table.grid(sector)
    x = grid.x_nodes
    prof = cfg.preset_amplitude * np.exp(
        -((x - cfg.preset_x0) / cfg.preset_width) ** 2)
    block = prop.table.block(ModeIndex(0, 0, 0, 0, 0, 0, 0, 0))
    _, vec1, vec2, vecth, vecy, _, _, _ = block
    arr = np.einsum("x,a,b,t,y->xabty", prof.astype(complex), vec1, vec2,
                    vecth, vecy)
    zeros = {sector: np.zeros_like(arr)}
    return CauchyData({sector: arr}, zeros)


def _write_sample(cfg, prop: KGPropagator, sample) -> None:
    tag = f"t{sample.t:g}".replace(".", "p").replace("-", "m")
    if cfg.out_format == "json":
        path = os.path.join(cfg.out_dir, f"field_{tag}.json")
        payload = {"t": sample.t, "tail_norm": sample.tail_norm, "sectors": []}
        for sector, arr in (sample.values or {}).items():
            grid = prop.table.grid(sector)
            payload["sectors"].append({
                "s3": sector.s3, "n": sector.n, "m": sector.m, "l": sector.l,
                "shape": list(arr.shape),
                "x": grid.x_nodes.tolist(),
                "theta1": grid.t1_nodes.tolist(),
                "theta2": grid.t2_nodes.tolist(),
                "theta": grid.th_nodes.tolist(),
                "y": grid.y_nodes.tolist(),
                "re": arr.real.ravel().tolist(),
                "im": arr.imag.ravel().tolist(),
            })
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        return
    path = os.path.join(cfg.out_dir, f"field_{tag}.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("s3", "n", "m", "l", "x", "theta1", "theta2",
                         "theta", "y", "re", "im"))
        for sector, arr in (sample.values or {}).items():
            grid = prop.table.grid(sector)
            for ix, xv in enumerate(grid.x_nodes):
                for i1, t1 in enumerate(grid.t1_nodes):
                    for i2, t2 in enumerate(grid.t2_nodes):
                        for it, th in enumerate(grid.th_nodes):
                            for iy, yv in enumerate(grid.y_nodes):
                                v = arr[ix, i1, i2, it, iy]
                                writer.writerow((
                                    sector.s3, sector.n, sector.m, sector.l,
                                    xv, t1, t2, th, yv, v.real, v.imag))


def _cmd_selftest(args) -> int:
    return _selftest.run_selftest(fast=args.fast)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ypqwave",
        description="Spectral solver for the Y^{p,q} Laplace basis and the "
                    "Klein-Gordon mode-sum propagator on AdS5 x Y^{p,q}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", help="solve the geometry constants")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--sigma-rule", choices=("prose", "display"),
                   default="prose", dest="sigma_rule")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=_cmd_geometry)

    a = sub.add_parser("angular", help="angular eigenvalues and norms")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--jmax", type=int, required=True)
    a.add_argument("--format", choices=("csv", "json"), default="csv")
    a.set_defaults(func=_cmd_angular)

    r = sub.add_parser("radial", help="radial eigenvalues")
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--q", type=int, required=True)
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--l", type=int, required=True)
    r.add_argument("--Lambda", type=float, required=True)
    r.add_argument("--kmax", type=int, required=True)
    r.add_argument("--nbasis", type=int, default=40)
    r.add_argument("--oracle", action="store_true")
    r.add_argument("--sigma-rule", choices=("prose", "display"),
                   default="prose", dest="sigma_rule")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.set_defaults(func=_cmd_radial)

    s = sub.add_parser("spectrum", help="assembled eigenvalues, sorted")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--mmax", type=int, required=True)
    s.add_argument("--lmax", type=int, required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--jmax", type=int, required=True)
    s.add_argument("--lambda-max", type=float, default=None, dest="lambda_max")
    s.add_argument("--nbasis", type=int, default=40)
    s.add_argument("--sigma-rule", choices=("prose", "display"),
                   default="prose", dest="sigma_rule")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=_cmd_spectrum)

    d = sub.add_parser("ads-modes", help="AdS radial eigenvalues and norms")
    d.add_argument("--beta1", type=int, required=True)
    d.add_argument("--c", type=float, required=True)
    d.add_argument("--imax", type=int, required=True)
    d.add_argument("--format", choices=("csv", "json"), default="csv")
    d.set_defaults(func=_cmd_ads_modes)

    pr = sub.add_parser("propagate", help="batch evolution from a config file")
    pr.add_argument("--config", required=True)
    pr.set_defaults(func=_cmd_propagate)

    st = sub.add_parser("selftest", help="run the invariant suite")
    st.add_argument("--fast", action="store_true")
    st.set_defaults(func=_cmd_selftest)
    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except YpqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - unexpected
        print(f"error: internal: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
