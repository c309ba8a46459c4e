"""Command-line front end.

Subcommands map one-to-one onto the verification families:

    identities   general-metric curvature identities
    soliton      soliton equation, Lemma identities, integrability conditions
    div          the scalar high divergences at one point
    integral     the compact-support integral identity on (cigar) x S^1
    bryant       rotationally symmetric steady profile properties
    export       write a zoo entry as a metric file

Reports are printed one record per line with 17 significant digits
(`--human` switches to 6); `--json` emits the same records as JSON lines.
Identical command + seed yields a byte-identical report body, and the exit
status is 0 exactly when no record FAILed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from riccisol import curvature as cv
from riccisol import metricfile as mf
from riccisol import quad, zoo
from riccisol import report as rp
from riccisol import soliton as so
from riccisol.jet import InsufficientOrderError

DEFAULT_ORDERS = {"identities": 5, "soliton": 7, "div": 7, "integral": 5}


def _add_common(p, with_points=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?", help="metric definition file")
    src.add_argument("--zoo", help="built-in witness name (see `export --list`)")
    if with_points:
        p.add_argument("--points", type=int, default=20, help="sample point count")
        p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--order", type=int, default=None, help="jet truncation order")
    p.add_argument("--tol", type=float, default=None,
                   help="override every check tolerance with this value")
    p.add_argument("--json", action="store_true", help="one JSON record per line")
    p.add_argument("--human", action="store_true", help="6-digit output")


def _load_spec(args):
    if args.zoo:
        return zoo.builtin(args.zoo).spec, args.zoo
    return mf.parse_metric_file(args.file), args.file


def _tols(args, base):
    if args.tol is None:
        return None
    return {k: args.tol for k in base}


def _emit(report: rp.CheckReport, args) -> int:
    body = report.to_json_lines() if args.json else report.to_text(human=args.human)
    print(body)
    return report.exit_code


def cmd_identities(args) -> int:
    spec, _ = _load_spec(args)
    order = args.order if args.order is not None else DEFAULT_ORDERS["identities"]
    need = cv.required_order(spec.dim)
    if order < need:
        raise InsufficientOrderError(
            f"identity suite at dimension {spec.dim} needs jet order >= {need}"
        )
    pts = spec.sample_points(args.points, args.seed)
    bundle = cv.CurvatureBundle(spec, pts, order)
    rep = cv.general_identity_suite(bundle, _tols(args, cv.TOLS))
    if order >= 6 and spec.dim >= 3:
        rep.extend(cv.divergence_report(bundle, _tols(args, cv.TOLS)))
    if args.zoo:
        rep.extend(zoo.verify_entry(zoo.builtin(args.zoo), pts, order, args.seed))
    return _emit(rep, args)


def cmd_soliton(args) -> int:
    spec, _ = _load_spec(args)
    order = args.order if args.order is not None else DEFAULT_ORDERS["soliton"]
    pts = spec.sample_points(args.points, args.seed)
    sb = so.SolitonBundle(spec, pts, order)
    rep = sb.full_report(_tols(args, so.TOLS))
    return _emit(rep, args)


def cmd_div(args) -> int:
    spec, _ = _load_spec(args)
    order = args.order if args.order is not None else DEFAULT_ORDERS["div"]
    point = np.array([float(v) for v in args.at.split(",")])
    bundle = cv.CurvatureBundle(spec, point[None, :], order)
    vals = bundle.high_divergences()
    rep = rp.CheckReport()
    for key in sorted(vals):
        v = float(vals[key][0])
        rep.add(rp.CheckRecord(f"{key}_value", tuple(point), v, 0.0, 0.0,
                               0.0, rp.PASS, "reported value"))
    r_cubed = float(bundle.scalar.values()[0]) ** 3 / 8.0
    rep.add(rp.CheckRecord("scalar_cubed_over_8_value", tuple(point), r_cubed,
                           0.0, 0.0, 0.0, rp.PASS, "reported value"))
    rep.extend(cv.divergence_report(bundle, _tols(args, cv.TOLS)))
    return _emit(rep, args)


def cmd_integral(args) -> int:
    entry = zoo.cigar_cross_circle(args.circumference)
    res = quad.refinement_check(entry, args.s, args.grid,
                                order=args.order or DEFAULT_ORDERS["integral"])
    fine, coarse = res["fine"], res["coarse"]
    tol = args.tol if args.tol is not None else 1e-5
    rep = rp.CheckReport()
    pt = (args.s, float(args.grid))
    rep.add(rp.CheckRecord("integral_lhs_positive", pt, fine["lhs"], 0.0, 0.0, tol,
                           rp.PASS if fine["lhs"] > 0 else rp.FAIL,
                           "lhs must be strictly positive"))
    rep.add(rp.CheckRecord("integral_identity_gap", pt, fine["lhs"], fine["rhs"],
                           fine["rel_gap"], tol,
                           rp.PASS if fine["rel_gap"] <= tol else rp.FAIL,
                           f"coarse grid {coarse['nodes_per_axis']}^2 gap "
                           f"{coarse['rel_gap']:.3e}"))
    floor = max(coarse["rel_gap"], 1e-12)
    rep.add(rp.CheckRecord("integral_gap_nonincreasing", pt, fine["rel_gap"],
                           coarse["rel_gap"], fine["rel_gap"], floor,
                           rp.PASS if fine["rel_gap"] <= floor else rp.FAIL,
                           "refined gap must not grow beyond the roundoff floor"))
    for side in ("lhs", "rhs"):
        delta = res[f"{side}_refinement_delta"] / abs(fine[side])
        rep.add(rp.CheckRecord(f"integral_{side}_stable", pt, fine[side],
                               coarse[side], delta, 1e-5,
                               rp.PASS if delta <= 1e-5 else rp.FAIL,
                               "relative movement under grid refinement"))
    return _emit(rep, args)


def cmd_bryant(args) -> int:
    from riccisol import bryant

    profile = bryant.bryant_solve(args.rmax, args.step)
    checks = profile_report(profile, tol=args.tol if args.tol is not None else 1e-6)
    print(f"# profile: {len(profile.r)} samples to r={profile.r[-1]:g}, "
          f"normalized R(0)={profile.hamilton_c:g}")
    return _emit(checks, args)


def profile_report(profile, tol: float = 1e-6) -> rp.CheckReport:
    from riccisol import bryant

    ck = bryant.profile_checks(profile)
    rep = rp.CheckReport()
    pt = (float(profile.r[0]), float(profile.r[-1]))
    for name in ("soliton_residual", "cotton_norm", "tip_ratio_minus_one"):
        rep.add(rp.CheckRecord(f"bryant_{name}", pt, ck[name], 0.0, ck[name], tol,
                               rp.PASS if ck[name] <= tol else rp.FAIL, ""))
    rep.add(rp.CheckRecord("bryant_hamilton_drift", pt, ck["hamilton_drift"], 0.0,
                           ck["hamilton_drift"], tol,
                           rp.PASS if ck["hamilton_drift"] <= tol else rp.FAIL,
                           "first-integral drift of the integration"))
    return rep


def cmd_export(args) -> int:
    if args.list:
        print("\n".join(zoo.all_names()))
        return 0
    if not args.zoo:
        raise KeyError("export needs --zoo NAME or --list")
    entry = zoo.builtin(args.zoo)
    text = mf.format_metric_spec(entry.spec)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="riccisol",
        description="numerical verification of curvature identities on "
                    "gradient Ricci solitons",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="general-metric curvature identities")
    _add_common(p)
    p.set_defaults(fn=cmd_identities)

    p = sub.add_parser("soliton", help="soliton identities and integrability")
    _add_common(p)
    p.set_defaults(fn=cmd_soliton)

    p = sub.add_parser("div", help="high divergence scalars at one point")
    _add_common(p, with_points=False)
    p.add_argument("--at", required=True, help="comma-separated chart point")
    p.set_defaults(fn=cmd_div)

    p = sub.add_parser("integral", help="compact-support integral identity")
    p.add_argument("--s", type=float, default=1.0, help="cutoff threshold")
    p.add_argument("--grid", type=int, default=64, help="Gauss-Legendre nodes per axis")
    p.add_argument("--circumference", type=float, default=None,
                   help="circle length of the periodic factor")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--human", action="store_true")
    p.set_defaults(fn=cmd_integral)

    p = sub.add_parser("bryant", help="rotationally symmetric steady profile")
    p.add_argument("--rmax", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--human", action="store_true")
    p.set_defaults(fn=cmd_bryant)

    p = sub.add_parser("export", help="write a zoo entry as a metric file")
    p.add_argument("--zoo", help="entry name")
    p.add_argument("--out", help="output path ('-' for stdout)")
    p.add_argument("--list", action="store_true", help="list entry names")
    p.set_defaults(fn=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, ArithmeticError, KeyError, OSError) as err:
        # input problems: bad files/expressions, domain violations, exhausted
        # jet orders, unknown witnesses
        msg = err.args[0] if err.args else err
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
