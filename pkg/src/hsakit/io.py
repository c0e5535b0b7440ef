"""Readers and writers for every on-disk format.

* parameter tables -- INI-style ``key = value`` records, one section per
  design, constants named as in the usual fit table (A, B, C_tau, ...);
* anchor sets -- CSV ``design,theta,value,unit``;
* cycling-test logs -- CSV ``time_s,displacement_mm,force_N,torque_Nmm,theta_deg``;
* hold tests -- CSV ``time_s,force_N``;
* relaxation models -- CSV ``term,value,tau_s``;
* servo catalogs -- CSV ``name,holding_torque_Nmm,angle_range_deg,speed_dps,mass_g``.

Writers go through :func:`atomic_write` so a failed run never leaves a
partial file behind.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import tempfile
from collections.abc import Iterable, Mapping
from contextlib import contextmanager
from importlib import resources
from pathlib import Path

import numpy as np

from .design_space import Handedness, HsaDesign, TrajectoryPoint, builtin_spec, parse_design_id
from .errors import (
    InputError,
    MalformedHeader,
    NonMonotoneTime,
    UnknownDesignPoint,
    UnparseableRow,
)
from .fitting import CycleTestRecord
from .motor_select import ServoSpec
from .relaxation import RelaxationModel
from .spring_model import AnchorCurve, AnchorModel, SpringFit, Unit

TABLE_FORMAT_VERSION = 1
LOG_HEADER = ("time_s", "displacement_mm", "force_N", "torque_Nmm", "theta_deg")
HOLD_HEADER = ("time_s", "force_N")
MODEL_HEADER = ("term", "value", "tau_s")
ANCHOR_HEADER = ("design", "theta", "value", "unit")
CATALOG_HEADER = ("name", "holding_torque_Nmm", "angle_range_deg", "speed_dps", "mass_g")

# Torque coefficient rows in anchor files carry no theta.
TORQUE_LIN_UNIT = "TorqueCoef_Nmm_per_deg"
TORQUE_QUAD_UNIT = "TorqueCoef_Nmm_per_deg2"


def bundled(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(str(resources.files("hsakit.data").joinpath(name)))


def fmt(x: float) -> str:
    return format(float(x), ".12g")


@contextmanager
def atomic_write(path):
    """Yield a text stream whose content replaces ``path`` only on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            yield fh
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


@contextmanager
def _text(source):
    if hasattr(source, "read"):
        yield source
    else:
        with open(source, newline="") as fh:
            yield fh


def _rows(fh, header, what):
    reader = csv.reader(fh)
    try:
        got = next(reader)
    except StopIteration:
        raise MalformedHeader(f"{what}: empty file") from None
    if tuple(h.strip() for h in got) != header:
        raise MalformedHeader(f"{what}: header must be {','.join(header)}, got {','.join(got)}")
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        if len(row) != len(header):
            raise UnparseableRow(lineno, f"expected {len(header)} fields, got {len(row)}")
        yield lineno, [c.strip() for c in row]


def _float(text, lineno, optional=False):
    if optional and text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise UnparseableRow(lineno, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise UnparseableRow(lineno, f"non-finite value: {text!r}")
    return value


# -- cycling-test logs -------------------------------------------------------

def parse_test_log(source, design: str | None = None) -> CycleTestRecord:
    """Read a cycling-test CSV into a validated record."""
    with _text(source) as fh:
        cols = []
        last_t, last_line = None, None
        for lineno, row in _rows(fh, LOG_HEADER, "test log"):
            vals = [_float(c, lineno) for c in row]
            if last_t is not None and vals[0] <= last_t:
                raise NonMonotoneTime(
                    f"line {lineno}: time {vals[0]:g} s does not follow {last_t:g} s (line {last_line})"
                )
            last_t, last_line = vals[0], lineno
            cols.append(vals)
    if len(cols) < 2:
        raise InputError("test log needs at least two data rows")
    arr = np.array(cols)
    if design is None and not hasattr(source, "read"):
        design = Path(source).stem
    return CycleTestRecord(*arr.T, design=design)


def write_test_log(record: CycleTestRecord, target) -> None:
    def dump(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for row in zip(record.time, record.displacement, record.force, record.torque, record.theta):
            w.writerow([repr(float(v)) for v in row])

    if hasattr(target, "write"):
        dump(target)
    else:
        with atomic_write(target) as fh:
            dump(fh)


# -- parameter tables --------------------------------------------------------

# (file key, SpringFit attribute) in fit-table column order.
TABLE_KEYS = (
    ("A", "force_quad"), ("B", "force_lin"), ("R2_blocked", "r2_blocked"),
    ("C_tau", "torque_lin"), ("D_tau", "torque_quad"), ("R2_torque", "r2_torque"),
    ("C_k", "stiffness_slope"), ("k0", "rest_stiffness"), ("R2_k", "r2_stiffness"),
    ("C_l", "length_slope"), ("L0", "rest_length"), ("R2_L", "r2_length"),
)


def _design_from_section(ident, sec):
    tp = sec.get("trajectory_point")
    if tp is None:
        try:
            tp_enum, rows = parse_design_id(ident)
        except UnknownDesignPoint:
            return None
    else:
        tp_enum, rows = TrajectoryPoint.parse(tp), int(sec.get("rows", "0"))
    printed = sec.get("printed_length")
    if printed is None:
        try:
            printed = builtin_spec(tp_enum, rows).printed_length
        except UnknownDesignPoint:
            return None
    hand = Handedness(sec.get("handedness", "left"))
    return HsaDesign(hand, tp_enum, rows, printed_length=float(printed))


def read_parameter_table(source=None) -> dict[str, SpringFit]:
    """Load a parameter table; defaults to the bundled fit table."""
    if source is None:
        source = bundled("closed_fits.ini")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with _text(source) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise InputError(f"parameter table: {exc}") from None
    if not parser.has_section("table"):
        raise InputError("parameter table lacks a [table] section")
    version = parser.get("table", "format_version", fallback=None)
    if version != str(TABLE_FORMAT_VERSION):
        raise InputError(f"unsupported parameter table format_version {version!r}")
    fits = {}
    for ident in parser.sections():
        if ident == "table":
            continue
        sec = parser[ident]
        try:
            values = {attr: float(sec[key]) for key, attr in TABLE_KEYS if key in sec}
            values["torque_quad"] = values.get("torque_quad", 0.0)
            theta = (float(sec["theta_min"]), float(sec["theta_max"]))
        except KeyError as exc:
            raise InputError(f"[{ident}] missing key {exc}") from None
        except ValueError as exc:
            raise InputError(f"[{ident}] {exc}") from None
        missing = [k for k, a in TABLE_KEYS if a not in values]
        if missing:
            raise InputError(f"[{ident}] missing keys: {', '.join(missing)}")
        fits[ident] = SpringFit(theta_min=theta[0], theta_max=theta[1],
                                design=_design_from_section(ident, sec), name=ident, **values)
    return fits


def format_parameter_table(fits: Mapping[str, SpringFit]) -> str:
    out = io.StringIO()
    out.write("# Programmable-spring fit table.  Units: deg, N, mm.\n")
    out.write("#   F_b = A th^2 + B th        tau_h = D_tau th^2 + C_tau th\n")
    out.write("#   k   = C_k th + k0          L     = C_l th + L0\n")
    out.write(f"[table]\nformat_version = {TABLE_FORMAT_VERSION}\n")
    for ident, fit in fits.items():
        out.write(f"\n[{ident}]\n")
        if fit.design is not None:
            d = fit.design
            out.write(f"trajectory_point = {d.trajectory_point.value}\nrows = {d.rows}\n")
            out.write(f"handedness = {d.handedness.value}\nprinted_length = {fmt(d.printed_length)}\n")
        out.write(f"theta_min = {fmt(fit.theta_min)}\ntheta_max = {fmt(fit.theta_max)}\n")
        for key, attr in TABLE_KEYS:
            out.write(f"{key} = {fmt(getattr(fit, attr))}\n")
    return out.getvalue()


def write_parameter_table(fits: Mapping[str, SpringFit], path) -> None:
    if len(set(fits)) != len(fits):
        raise InputError("duplicate design identifiers")
    with atomic_write(path) as fh:
        fh.write(format_parameter_table(fits))


# -- anchor sets -------------------------------------------------------------

def read_anchor_models(source=None) -> dict[str, AnchorModel]:
    """Load anchor-curve models; defaults to the bundled anchor set."""
    if source is None:
        source = bundled("anchors.csv")
    points: dict[str, dict[str, list]] = {}
    coeffs: dict[str, dict[str, float]] = {}
    with _text(source) as fh:
        for lineno, (design, theta, value, unit) in _rows(fh, ANCHOR_HEADER, "anchor file"):
            val = _float(value, lineno)
            if unit in (TORQUE_LIN_UNIT, TORQUE_QUAD_UNIT):
                coeffs.setdefault(design, {})[unit] = val
                continue
            try:
                Unit(unit)
            except ValueError:
                raise UnparseableRow(lineno, f"unknown unit {unit!r}") from None
            points.setdefault(design, {}).setdefault(unit, []).append((_float(theta, lineno), val))
    models = {}
    for design, curves in points.items():
        def curve(unit):
            pts = curves.get(unit.value)
            if pts is None:
                return None
            return AnchorCurve.from_points(pts, unit)

        for needed in (Unit.FORCE_N, Unit.STIFFNESS_N_PER_MM, Unit.LENGTH_MM):
            if needed.value not in curves:
                raise InputError(f"anchor design {design!r} lacks a {needed.value} curve")
        c = coeffs.get(design)
        torque_coeffs = None
        if c:
            torque_coeffs = (c.get(TORQUE_QUAD_UNIT, 0.0), c.get(TORQUE_LIN_UNIT, 0.0))
        try:
            tp, rows = parse_design_id(design)
            hsa = builtin_spec(tp, rows).design()
        except UnknownDesignPoint:
            hsa = None
        models[design] = AnchorModel(
            name=design, blocked=curve(Unit.FORCE_N), stiffness=curve(Unit.STIFFNESS_N_PER_MM),
            length=curve(Unit.LENGTH_MM), torque=curve(Unit.TORQUE_NMM),
            torque_coefficients=torque_coeffs, design=hsa,
        )
    return models


def format_anchor_models(models: Iterable[AnchorModel]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ANCHOR_HEADER)
    for m in models:
        for c in (m.blocked, m.stiffness, m.length, m.torque):
            if c is not None:
                for th, v in zip(c.thetas, c.values):
                    w.writerow([m.name, fmt(th), fmt(v), c.unit.value])
        if m.torque_coefficients is not None:
            quad, lin = m.torque_coefficients
            w.writerow([m.name, "", fmt(quad), TORQUE_QUAD_UNIT])
            w.writerow([m.name, "", fmt(lin), TORQUE_LIN_UNIT])
    return out.getvalue()


# -- hold tests and relaxation models ---------------------------------------

def parse_hold_test(source) -> list[tuple[float, float]]:
    with _text(source) as fh:
        pts = [(_float(t, n), _float(f, n)) for n, (t, f) in _rows(fh, HOLD_HEADER, "hold test")]
    if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise NonMonotoneTime("hold-test time must be strictly increasing")
    return pts


def format_relaxation_model(model: RelaxationModel) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(MODEL_HEADER)
    w.writerow(["peak", fmt(model.reference_peak), ""])
    w.writerow(["plateau", fmt(model.plateau), ""])
    for amp, tau in model.modes:
        w.writerow(["mode", fmt(amp), fmt(tau)])
    if not math.isnan(model.reference_extension):
        w.writerow(["extension", fmt(model.reference_extension), ""])
    return out.getvalue()


def write_relaxation_model(model: RelaxationModel, path) -> None:
    with atomic_write(path) as fh:
        fh.write(format_relaxation_model(model))


def read_relaxation_model(source) -> RelaxationModel:
    peak = plateau = None
    extension = float("nan")
    modes = []
    with _text(source) as fh:
        for n, (term, value, tau) in _rows(fh, MODEL_HEADER, "relaxation model"):
            v = _float(value, n)
            if term == "peak":
                peak = v
            elif term == "plateau":
                plateau = v
            elif term == "mode":
                modes.append((v, _float(tau, n)))
            elif term == "extension":
                extension = v
            else:
                raise UnparseableRow(n, f"unknown term {term!r}")
    if peak is None or plateau is None:
        raise InputError("relaxation model needs peak and plateau rows")
    return RelaxationModel(plateau, tuple(modes), peak, extension)


# -- servo catalogs ----------------------------------------------------------

def read_servo_catalog(source=None) -> list[ServoSpec]:
    if source is None:
        source = bundled("demo_servos.csv")
    servos = []
    with _text(source) as fh:
        for n, (name, torque, angle, speed, mass) in _rows(fh, CATALOG_HEADER, "servo catalog"):
            if not name:
                raise UnparseableRow(n, "servo name is empty")
            try:
                servos.append(ServoSpec(name, _float(torque, n), _float(angle, n),
                                        _float(speed, n, optional=True), _float(mass, n, optional=True)))
            except InputError as exc:
                raise UnparseableRow(n, str(exc)) from None
    return servos
