"""Command-line interface: ``hsakit fit|predict|select-motor|relax|report``.

Exit status: 0 success, 1 domain failure (nothing feasible, data that
cannot be fitted), 2 bad input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import io as hio
from .design_space import load_design_points, parse_design_id
from .errors import (
    HsaError,
    InputError,
    ModeUnsupported,
    NoFeasibleDesign,
    UnknownDesign,
    UnknownDesignPoint,
)
from .fitting import TorqueOrder, fit_record
from .motor_select import (
    DEFAULT_TORQUE_MARGIN,
    ActuationMode,
    ActuationRequirement,
    best_report,
    evaluate_design,
    rank_servos,
    tradeoff_table,
)
from .relaxation import fit_relaxation, force_at_time, max_hold_time, retained_fraction
from .spring_model import SpringFit, force_direction, theta_for_length

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2

SWEEP_HEADER = ("theta_deg", "blocked_force_N", "spring_constant_NperMM",
                "min_energy_length_mm", "holding_torque_Nmm")


def _num(x, digits=4):
    return f"{x:.{digits}f}"


# -- fit ---------------------------------------------------------------------

def _log_spec(text, points):
    ident, sep, path = text.partition("=")
    if not sep:
        path, ident = text, Path(text).stem
    try:
        spec = points[parse_design_id(ident)]
    except (UnknownDesignPoint, KeyError):
        raise UnknownDesign(f"{ident!r} is not a known design point; name the log <design>.csv "
                            "or pass <design>=<path> (e.g. closed-8=run3.csv)") from None
    return ident, Path(path), spec


def cmd_fit(args):
    points = load_design_points(args.design_points) if args.design_points else load_design_points()
    jobs = [_log_spec(t, points) for t in args.logs]
    idents = [j[0] for j in jobs]
    if len(set(idents)) != len(idents):
        raise InputError("each design may appear only once")
    order = TorqueOrder(args.torque_order)
    fits = {}
    for ident, path, spec in jobs:
        record = hio.parse_test_log(path, design=ident)
        fits[ident] = fit_record(record, spec.printed_length, torque_order=order,
                                 drop_first=not args.keep_first_cycle, window=args.window,
                                 design=spec.design(), name=ident)
    hio.write_parameter_table(fits, args.output)
    print(f"{'design':<12} {'A':>12} {'B':>10} {'R2':>7} {'C_tau':>9} {'D_tau':>10} {'R2':>7} "
          f"{'C_k':>11} {'k0':>8} {'R2':>7} {'C_l':>8} {'L0':>10} {'R2':>7}")
    for ident, f in fits.items():
        print(f"{ident:<12} {f.force_quad:>12.4e} {f.force_lin:>10.4f} {f.r2_blocked:>7.4f} "
              f"{f.torque_lin:>9.4f} {f.torque_quad:>10.3e} {f.r2_torque:>7.4f} "
              f"{f.stiffness_slope:>11.4e} {f.rest_stiffness:>8.4f} {f.r2_stiffness:>7.4f} "
              f"{f.length_slope:>8.4f} {f.rest_length:>10.4f} {f.r2_length:>7.4f}")
    print(f"wrote {args.output}")
    return EXIT_OK


# -- predict / report --------------------------------------------------------

def _models(table, anchors):
    models = dict(hio.read_parameter_table(table))
    if anchors is not None:
        for ident, m in hio.read_anchor_models(None if anchors == "bundled" else anchors).items():
            models.setdefault(ident, m)
    return models


def _sweep_rows(model, step):
    n = int(round((model.theta_max - model.theta_min) / step))
    thetas = model.theta_min + step * np.arange(n + 1)
    thetas = thetas[thetas <= model.theta_max + 1e-9]
    return [(th, model.blocked_force(th), model.spring_constant(th),
             model.min_energy_length(th), model.holding_torque(th)) for th in thetas]


def _write_sweep(model, step, path):
    with hio.atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in _sweep_rows(model, step):
            w.writerow([hio.fmt(v) for v in row])


def cmd_predict(args):
    models = _models(args.table, args.anchors)
    if args.design not in models:
        raise UnknownDesign(f"design {args.design!r} not found; available: {', '.join(models)}")
    model = models[args.design]
    if args.length is not None:
        if not isinstance(model, SpringFit):
            raise InputError("length queries need a fitted design")
        theta = theta_for_length(model, args.length)
    else:
        theta = args.theta
    fb = model.blocked_force(theta)
    print(f"design                 {model.ident}")
    print(f"theta_deg              {_num(theta)}")
    print(f"blocked_force_N        {_num(fb)} ({force_direction(fb).value})")
    print(f"spring_constant_NperMM {_num(model.spring_constant(theta))}")
    print(f"min_energy_length_mm   {_num(model.min_energy_length(theta))}")
    print(f"holding_torque_Nmm     {_num(model.holding_torque(theta))}")
    if args.sweep:
        _write_sweep(model, args.step, args.sweep)
        print(f"wrote {args.sweep}")
    return EXIT_OK


def cmd_report(args):
    models = _models(args.table, args.anchors)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for ident, model in models.items():
        _write_sweep(model, args.step, out / f"{ident}_sweep.csv")
    print(f"{'design':<12} {'theta':>7} {'throw_mm':>9} {'|F_b|_N':>9} {'k_NperMM':>9} {'|tau|_Nmm':>10}")
    for r in tradeoff_table(models.values()):
        print(f"{r.design:<12} {r.theta:>7.1f} {r.throw:>9.3f} {r.blocked_force:>9.3f} "
              f"{r.stiffness:>9.4f} {r.torque:>10.3f}")
    print(f"wrote {len(models)} sweep files to {out}")
    return EXIT_OK


# -- select-motor ------------------------------------------------------------

def _relax_input(path):
    """Fit a hold test or load a saved model, by header."""
    with open(path, newline="") as fh:
        header = fh.readline().strip()
    if header == ",".join(hio.MODEL_HEADER):
        return hio.read_relaxation_model(path)
    return fit_relaxation(hio.parse_hold_test(path))


def cmd_select_motor(args):
    if args.push is not None:
        mode, force = ActuationMode.PUSH, args.push
    elif args.pull is not None:
        mode, force = ActuationMode.PULL, args.pull
    else:
        if args.force is None:
            raise InputError("--bidirectional needs --force")
        mode, force = ActuationMode.BIDIRECTIONAL, args.force
    req = ActuationRequirement(mode, force, args.stroke, args.stiffness, args.hold)
    relax = _relax_input(args.relax) if args.relax else None
    catalog = hio.read_servo_catalog(args.catalog)
    models = _models(args.table, None if args.no_anchors else args.anchors)

    reports = []
    print(f"requirement: {mode.value} {force:g} N, stroke {args.stroke:g} mm")
    for ident, model in models.items():
        try:
            rep = evaluate_design(model, req, relax)
        except ModeUnsupported:
            print(f"  {ident:<12} mode unsupported")
            continue
        reports.append(rep)
        if rep.feasible:
            print(f"  {ident:<12} feasible    theta {rep.required_theta:8.2f} deg  "
                  f"torque {rep.required_torque:8.2f} N*mm  max force {rep.achievable_force:.2f} N")
        else:
            print(f"  {ident:<12} infeasible  {'; '.join(rep.notes)}")
    best = best_report(reports)
    if best is None:
        raise NoFeasibleDesign(f"no design can {mode.value} {force:g} N")
    print(f"selected design: {best.design}")
    print(f"  required theta  {best.required_theta:.2f} deg (travel {best.theta_span:.2f} deg)")
    print(f"  required torque {best.required_torque:.2f} N*mm")
    print(f"  derated force   {best.derated_force:.2f} N")
    for note in best.notes:
        print(f"  note: {note}")
    ranked = rank_servos(catalog, best, args.margin)
    if not ranked:
        print(f"no servo in the catalog meets {args.margin:g} x {best.required_torque:.2f} N*mm "
              f"over {best.theta_span:.1f} deg")
        return EXIT_DOMAIN
    print(f"servos (margin {args.margin:g}):")
    for i, s in enumerate(ranked, 1):
        mass = "?" if s.mass is None else f"{s.mass:g} g"
        print(f"  {i}. {s.name:<22} {s.holding_torque:8.1f} N*mm  {s.angle_range:6.0f} deg  {mass}")
    return EXIT_OK


# -- relax -------------------------------------------------------------------

def _windows(text):
    try:
        return [tuple(float(v) for v in part.split(":")) for part in text.split(",")]
    except ValueError:
        raise InputError(f"bad --windows {text!r}; use start:end,start:end") from None


def cmd_relax(args):
    path = args.input or hio.bundled("relaxation_hold.csv")
    with open(path, newline="") as fh:
        header = fh.readline().strip()
    if header == ",".join(hio.MODEL_HEADER):
        model = hio.read_relaxation_model(path)
    else:
        windows = _windows(args.windows) if args.windows else None
        model = fit_relaxation(hio.parse_hold_test(path), n_modes=args.modes, windows=windows)
    print(f"peak_N     {_num(model.reference_peak)}")
    print(f"plateau_N  {_num(model.plateau)}")
    for amp, tau in model.modes:
        print(f"mode       amplitude {_num(amp)} N  tau {tau:.6g} s")
    for t in args.at or []:
        print(f"t={t:g}s  force {_num(force_at_time(model, t))} N  "
              f"retained {_num(retained_fraction(model, t))}")
    if args.max_hold is not None:
        t = max_hold_time(model, args.max_hold)
        shown = "unbounded" if math.isinf(t) else f"{t:.3f} s"
        print(f"max hold at {args.max_hold:g} of peak: {shown}")
    if args.save_model:
        hio.write_relaxation_model(model, args.save_model)
        print(f"wrote {args.save_model}")
    if args.curve:
        times = np.concatenate([[0.0], np.logspace(-2, np.log10(max(args.curve_end, 0.02)), 200)])
        with hio.atomic_write(args.curve) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("time_s", "force_N", "retained_fraction"))
            for t in times:
                w.writerow([hio.fmt(t), hio.fmt(force_at_time(model, t)),
                            hio.fmt(retained_fraction(model, t))])
        print(f"wrote {args.curve}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hsakit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit spring models to cycling-test logs")
    f.add_argument("logs", nargs="+", metavar="[DESIGN=]LOG", help="test log CSV files")
    f.add_argument("-o", "--output", required=True, help="parameter table to write")
    f.add_argument("--torque-order", choices=[o.value for o in TorqueOrder], default="linear")
    f.add_argument("--keep-first-cycle", action="store_true")
    f.add_argument("--window", type=float, default=4.0, help="stiffness window, mm")
    f.add_argument("--design-points", help="design-point CSV (default: bundled)")
    f.set_defaults(func=cmd_fit)

    def tables(sp, anchors_default=None):
        sp.add_argument("--table", help="parameter table (default: bundled fit table)")
        sp.add_argument("--anchors", nargs="?", const="bundled", default=anchors_default,
                        help="also load anchor models (bundled set when no path given)")

    pr = sub.add_parser("predict", help="evaluate one design at a twist or length")
    tables(pr, anchors_default="bundled")
    pr.add_argument("design")
    q = pr.add_mutually_exclusive_group(required=True)
    q.add_argument("--theta", type=float, help="twist, deg")
    q.add_argument("--length", type=float, help="target minimum-energy length, mm")
    pr.add_argument("--sweep", help="write a theta sweep CSV here")
    pr.add_argument("--step", type=float, default=1.0, help="sweep step, deg")
    pr.set_defaults(func=cmd_predict)

    r = sub.add_parser("report", help="theta sweeps and tradeoff table for every design")
    tables(r)
    r.add_argument("--out-dir", required=True)
    r.add_argument("--step", type=float, default=1.0)
    r.set_defaults(func=cmd_report)

    s = sub.add_parser("select-motor", help="pick a design and rank servos for a requirement")
    tables(s, anchors_default="bundled")
    s.add_argument("--no-anchors", action="store_true", help="use only the parameter table")
    s.add_argument("--catalog", help="servo catalog CSV (default: bundled demo catalog)")
    m = s.add_mutually_exclusive_group(required=True)
    m.add_argument("--push", type=float, metavar="N")
    m.add_argument("--pull", type=float, metavar="N")
    m.add_argument("--bidirectional", action="store_true")
    s.add_argument("--force", type=float, metavar="N", help="force for --bidirectional")
    s.add_argument("--stroke", type=float, default=0.0, metavar="MM")
    s.add_argument("--stiffness", type=float, metavar="N_PER_MM")
    s.add_argument("--hold", type=float, metavar="S", help="hold duration for derating")
    s.add_argument("--relax", metavar="CSV", help="hold test or relaxation model for derating")
    s.add_argument("--margin", type=float, default=DEFAULT_TORQUE_MARGIN)
    s.set_defaults(func=cmd_select_motor)

    x = sub.add_parser("relax", help="fit or query a stress-relaxation model")
    x.add_argument("input", nargs="?", help="hold test or model CSV (default: bundled dataset)")
    x.add_argument("--modes", type=int, default=2, choices=(1, 2))
    x.add_argument("--windows", help="per-mode fit windows, e.g. 0:0.16,0.16:1.2")
    x.add_argument("--at", type=float, action="append", metavar="T", help="query time, s")
    x.add_argument("--max-hold", type=float, metavar="FRACTION")
    x.add_argument("--save-model", metavar="CSV")
    x.add_argument("--curve", metavar="CSV", help="write a decay curve")
    x.add_argument("--curve-end", type=float, default=1200.0, help="curve end time, s")
    x.set_defaults(func=cmd_relax)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HsaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
