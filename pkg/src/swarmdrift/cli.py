"""Command-line surface: single-point drift, reference table, frontier and
grid sweeps, and the Monte Carlo validator.

Single results are emitted as JSON records, sweeps as plain CSV (header row,
comma separators, '.' decimals).  Exit codes: 0 decided, 2 indeterminate,
3 numerical non-convergence, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import boundary as boundary_mod
from . import drift, montecarlo
from .angle import FixedPointConfig, stationary_cdf
from .errors import NoBracket, NoConvergence, SwarmDriftError
from .params import SwarmParams

EXIT_OK = 0
EXIT_INDETERMINATE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_USAGE = 64

# Widely used parameter triples with the reference drift values they map to.
STANDARD_PARAMETER_SETS = [
    (0.72984, 1.496172, 1.496172, -0.194063),
    (0.72984, 2.04355, 0.94879, -0.177108),
    (0.6, 1.7, 1.7, -0.327742),
    (0.9, 0.1, 0.1, -0.100728),
    (0.7, 0.3, 0.3, -0.338770),
    (0.9, 3.0, 3.0, 0.380623),
    (0.1, 0.1, 0.1, -0.241938),
    (0.1, 2.1, 2.1, -0.485162),
    (-0.7, 0.5, 0.5, -0.133533),
]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--initial-knots", type=int, default=64)
    p.add_argument("--max-knots", type=int, default=2048)
    p.add_argument("--eval-knots", type=int, default=8192)
    p.add_argument("--l2-tol", type=float, default=1e-7)
    p.add_argument("--blend", type=float, default=0.1)
    p.add_argument("--max-iterations", type=int, default=20000)
    p.add_argument("--clip", type=float, default=1e-15)


def _config_from(args) -> FixedPointConfig:
    return FixedPointConfig(
        initial_knots=args.initial_knots,
        max_knots=args.max_knots,
        l2_tolerance=args.l2_tol,
        blend_factor=args.blend,
        max_iterations=args.max_iterations,
        eval_knots=args.eval_knots,
        boundary_clip=args.clip,
    )


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> _Parser:
    parser = _Parser(prog="swarmdrift")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("omega", help="drift and verdict for one parameter triple")
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--cl", type=float, required=True)
    p.add_argument("--cg", type=float, required=True)
    p.add_argument("--dump-cdf", help="write the stationary CDF spline as JSON")
    p.add_argument("--output")
    _add_config_flags(p)

    p = sub.add_parser("table1", help="recompute the reference parameter table")
    p.add_argument("--output")
    _add_config_flags(p)

    p = sub.add_parser("boundary", help="trace the convergence frontier over chi")
    p.add_argument("--chi-min", type=float, required=True)
    p.add_argument("--chi-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=0, help="chi subdivisions")
    p.add_argument("--tol", type=float, default=1e-3, help="bisection bracket width")
    p.add_argument("--c-hi", type=float, default=4.5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output")
    _add_config_flags(p)

    p = sub.add_parser("grid", help="drift over a (chi, c) grid, c_l = c_g = c")
    p.add_argument("--chi-min", type=float, required=True)
    p.add_argument("--chi-max", type=float, required=True)
    p.add_argument("--chi-steps", type=int, required=True)
    p.add_argument("--c-min", type=float, required=True)
    p.add_argument("--c-max", type=float, required=True)
    p.add_argument("--c-steps", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output")
    _add_config_flags(p)

    p = sub.add_parser("simulate", help="single long-run Monte Carlo estimate")
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--cl", type=float, required=True)
    p.add_argument("--cg", type=float, required=True)
    p.add_argument("--iterations", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--batches", type=int, default=100)
    p.add_argument("--histogram", help="write (bin_midpoint, density) CSV here")
    p.add_argument("--compare", action="store_true",
                   help="attach a z-score against the numeric drift")
    p.add_argument("--output")
    _add_config_flags(p)

    return parser


def _cmd_omega(args) -> int:
    cfg = _config_from(args)
    params = SwarmParams(args.chi, args.cl, args.cg)
    try:
        verdict = drift.classify(params, cfg)
    except NoConvergence as exc:
        sys.stderr.write(f"no convergence: {exc}\n")
        return EXIT_NO_CONVERGENCE
    if verdict.omega is None and verdict.note:
        sys.stderr.write(f"no convergence: {verdict.note}\n")
        return EXIT_NO_CONVERGENCE
    record = {
        "chi": args.chi,
        "c_l": args.cl,
        "c_g": args.cg,
        "omega": verdict.omega.omega if verdict.omega else None,
        "error": verdict.omega.abs_error_estimate if verdict.omega else None,
        "iterations": verdict.omega.fixed_point_iterations if verdict.omega else 0,
        "method": verdict.omega.method if verdict.omega else None,
        "verdict": verdict.kind,
    }
    _emit(json.dumps(record) + "\n", args.output)
    if args.dump_cdf:
        F, _ = stationary_cdf(params, cfg)
        with open(args.dump_cdf, "w") as fh:
            fh.write(F.spline.to_json())
    return EXIT_INDETERMINATE if verdict.kind == drift.INDETERMINATE else EXIT_OK


def _cmd_table1(args) -> int:
    cfg = _config_from(args)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["source_chi", "source_cl", "source_cg", "paper_omega",
                     "computed_omega", "abs_dev"])
    for chi, c_l, c_g, ref in STANDARD_PARAMETER_SETS:
        try:
            result = drift.omega_general(SwarmParams(chi, c_l, c_g), cfg)
            writer.writerow([chi, c_l, c_g, ref, f"{result.omega:.6f}",
                             f"{abs(result.omega - ref):.2e}"])
        except SwarmDriftError as exc:
            writer.writerow([chi, c_l, c_g, ref, "error", str(exc)])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _cmd_boundary(args) -> int:
    cfg = _config_from(args)
    chis = np.linspace(args.chi_min, args.chi_max, args.steps + 1)
    points = boundary_mod.boundary_curve(chis, args.tol, cfg, args.c_hi, args.jobs)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["chi", "c_star", "bracket_width", "trelea",
                     "variance_bound", "status"])
    for chi, point in zip(chis, points):
        trelea = boundary_mod.trelea_bound(chi)
        var = boundary_mod.variance_bound(chi)
        if point is None:
            writer.writerow([chi, "", "", trelea, var, "no_bracket"])
        else:
            writer.writerow([chi, f"{point.c_star:.6f}",
                             f"{point.bracket_width:.2e}", trelea, var, "ok"])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _grid_cell(task):
    chi, c, cfg = task
    try:
        verdict = drift.classify(SwarmParams(chi, c, c), cfg)
    except SwarmDriftError as exc:
        return chi, c, "", f"error: {exc}"
    omega = f"{verdict.omega.omega:.6f}" if verdict.omega else ""
    return chi, c, omega, verdict.kind


def _cmd_grid(args) -> int:
    cfg = _config_from(args)
    chis = np.linspace(args.chi_min, args.chi_max, args.chi_steps + 1)
    cs = np.linspace(args.c_min, args.c_max, args.c_steps + 1)
    tasks = [(chi, c, cfg) for chi in chis for c in cs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_grid_cell, tasks))
    else:
        rows = [_grid_cell(t) for t in tasks]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["chi", "c", "omega", "verdict"])
    writer.writerows(rows)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    params = SwarmParams(args.chi, args.cl, args.cg)
    sim_cfg = montecarlo.SimConfig(args.iterations, args.seed, args.bins,
                                   args.batches)
    stats = montecarlo.simulate_drift(params, sim_cfg)
    record = {
        "chi": args.chi,
        "c_l": args.cl,
        "c_g": args.cg,
        "iterations_used": stats.iterations_used,
        "seed": args.seed,
        "mean_drift": stats.mean_drift,
        "stderr": stats.stderr,
        "singular_redraws": stats.singular_redraws,
    }
    if args.compare:
        try:
            result = drift.omega_general(params, _config_from(args))
        except NoConvergence as exc:
            sys.stderr.write(f"no convergence: {exc}\n")
            return EXIT_NO_CONVERGENCE
        record["omega"] = result.omega
        record["z_score"] = (stats.mean_drift - result.omega) / stats.stderr
    _emit(json.dumps(record) + "\n", args.output)
    if args.histogram:
        bins = len(stats.histogram)
        mids = -np.pi / 2.0 + (np.arange(bins) + 0.5) * (np.pi / bins)
        with open(args.histogram, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_midpoint", "density"])
            for mid, dens in zip(mids, stats.histogram):
                writer.writerow([f"{mid:.8f}", f"{dens:.8f}"])
    return EXIT_OK


_DISPATCH = {
    "omega": _cmd_omega,
    "table1": _cmd_table1,
    "boundary": _cmd_boundary,
    "grid": _cmd_grid,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    return _DISPATCH[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
