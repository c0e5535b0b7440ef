"""Motor selection: from a force/stroke requirement to a ranked servo list.

For each candidate actuator model the smallest twist that produces the
required blocked force is found by bisection on ``|F_b|``.  The holding
torque at that twist sizes the motor.  Works with both
:class:`~hsakit.spring_model.SpringFit` and
:class:`~hsakit.spring_model.AnchorModel` candidates.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyCatalog, InputError, ModeUnsupported
from .relaxation import RelaxationModel, retained_fraction
from .spring_model import ForceDirection, force_direction

DEFAULT_TORQUE_MARGIN = 1.5
MONOTONE_GRID_STEP = 0.1  # deg


class ActuationMode(Enum):
    PUSH = "push"
    PULL = "pull"
    BIDIRECTIONAL = "bidirectional"


@dataclass(frozen=True)
class ActuationRequirement:
    mode: ActuationMode
    required_force: float  # N
    required_stroke: float = 0.0  # mm
    required_stiffness: float | None = None  # N/mm
    hold_duration: float | None = None  # s

    def __post_init__(self):
        if not self.required_force > 0:
            raise InputError("required force must be positive")
        if self.required_stroke < 0:
            raise InputError("required stroke must be >= 0")
        if self.hold_duration is not None and self.hold_duration < 0:
            raise InputError("hold duration must be >= 0")


@dataclass(frozen=True)
class ServoSpec:
    name: str
    holding_torque: float  # N*mm
    angle_range: float  # deg
    speed: float | None = None  # deg/s
    mass: float | None = None  # g

    def __post_init__(self):
        if not self.holding_torque > 0 or not self.angle_range > 0:
            raise InputError(f"servo {self.name!r}: torque and angle range must be positive")


@dataclass(frozen=True)
class FeasibilityReport:
    design: str
    mode: ActuationMode
    required_theta: float | None  # deg, signed
    required_torque: float | None  # N*mm, magnitude
    achievable_force: float  # N, best the design can do in this mode
    achievable_stroke: float  # mm
    feasible: bool
    derated_force: float  # N, achievable force after relaxation
    theta_span: float | None = None  # deg of servo travel needed
    notes: tuple[str, ...] = ()


def _sides(model, mode: ActuationMode):
    lo, hi = model.theta_min, model.theta_max
    start = min(max(0.0, lo), hi)
    extend = hi > 0
    contract = lo < 0
    if mode is ActuationMode.PUSH and not extend:
        raise ModeUnsupported(f"{model.ident}: push needs a positive twist range")
    if mode is ActuationMode.PULL and not contract:
        raise ModeUnsupported(f"{model.ident}: pull needs a negative twist range")
    if mode is ActuationMode.BIDIRECTIONAL and not (extend and contract):
        raise ModeUnsupported(f"{model.ident}: bidirectional needs twist on both sides of zero")
    sides = []
    if mode in (ActuationMode.PUSH, ActuationMode.BIDIRECTIONAL):
        sides.append((ActuationMode.PUSH, start, hi))
    if mode in (ActuationMode.PULL, ActuationMode.BIDIRECTIONAL):
        sides.append((ActuationMode.PULL, start, lo))
    return sides


def _bisect_force(model, start, end, target, tol=1e-9):
    a, b = start, end
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        if abs(model.blocked_force(mid)) >= target:
            b = mid
        else:
            a = mid
    return b


def _solve_side(model, side, start, end, target):
    """(theta, capability, note) for one direction of actuation."""
    n = max(2, int(math.ceil(abs(end - start) / MONOTONE_GRID_STEP)) + 1)
    grid = np.linspace(start, end, n)
    mags = np.abs(model.blocked_force(grid))
    capability = float(mags[-1])
    if np.any(np.diff(mags) < -1e-12 * max(1.0, capability)):
        return None, capability, f"{side.value}: |blocked force| is not monotone in twist; rejected"
    want = ForceDirection.PUSH if side is ActuationMode.PUSH else ForceDirection.PULL
    if force_direction(model.blocked_force(end)) is not want:
        return None, 0.0, f"{side.value}: blocked force has the wrong sign for {side.value}ing"
    if capability < target:
        return None, capability, f"{side.value}: force {capability:.3g} N < needed {target:.3g} N"
    if target <= mags[0]:
        return float(start), capability, None
    return _bisect_force(model, start, end, target), capability, None


def evaluate_design(model, req: ActuationRequirement,
                    relax: RelaxationModel | None = None) -> FeasibilityReport:
    """Twist, torque and feasibility of one actuator model for a requirement.

    With a relaxation model and a hold duration the force target is raised
    so that the force still meets the requirement at the end of the hold.
    """
    sides = _sides(model, req.mode)
    fraction = 1.0
    if relax is not None and req.hold_duration:
        fraction = float(retained_fraction(relax, req.hold_duration))
    target = req.required_force / fraction
    notes = []
    if fraction < 1.0:
        notes.append(f"relaxation keeps {fraction:.3f} of peak after {req.hold_duration:g} s")

    thetas, capabilities = [], []
    for side, start, end in sides:
        theta, cap, note = _solve_side(model, side, start, end, target)
        thetas.append(theta)
        capabilities.append(cap)
        if note:
            notes.append(note)
    achievable = min(capabilities)
    force_ok = all(th is not None for th in thetas)

    if req.mode is ActuationMode.BIDIRECTIONAL:
        stroke = abs(model.min_energy_length(model.theta_max) - model.min_energy_length(model.theta_min))
    else:
        _, start, end = sides[0]
        stroke = abs(model.min_energy_length(end) - model.min_energy_length(start))
    stroke_ok = stroke >= req.required_stroke
    if not stroke_ok:
        notes.append(f"stroke: {stroke:.3g} mm < needed {req.required_stroke:.3g} mm")

    required_theta = required_torque = span = None
    stiffness_ok = True
    if force_ok:
        required_theta = max(thetas, key=lambda th: (abs(th), th))
        required_torque = max(abs(model.holding_torque(th)) for th in thetas)
        span = sum(abs(th) for th in thetas)
        if req.required_stiffness is not None:
            k = min(model.spring_constant(th) for th in thetas)
            if k < req.required_stiffness:
                stiffness_ok = False
                notes.append(f"stiffness: {k:.3g} N/mm < needed {req.required_stiffness:.3g} N/mm")

    return FeasibilityReport(
        design=model.ident, mode=req.mode,
        required_theta=required_theta, required_torque=required_torque,
        achievable_force=achievable, achievable_stroke=float(stroke),
        feasible=force_ok and stroke_ok and stiffness_ok,
        derated_force=achievable * fraction, theta_span=span, notes=tuple(notes),
    )


def rank_servos(catalog: Sequence[ServoSpec], report: FeasibilityReport,
                torque_margin: float = DEFAULT_TORQUE_MARGIN) -> list[ServoSpec]:
    """Servos able to drive a feasible design, best match first.

    A servo qualifies with holding torque >= ``torque_margin`` times the
    required torque and enough angle range for the twist travel.  Order is
    by torque surplus, then mass (unknown mass last), then name.
    """
    if not catalog:
        raise EmptyCatalog("servo catalog is empty")
    if not report.feasible:
        raise InputError(f"{report.design}: cannot rank servos for an infeasible design")
    if torque_margin < 1:
        raise InputError("torque margin must be >= 1")
    need_torque = torque_margin * report.required_torque
    travel = report.theta_span if report.theta_span is not None else abs(report.required_theta)
    ok = [s for s in catalog if s.holding_torque >= need_torque and s.angle_range >= travel]
    return sorted(ok, key=lambda s: (s.holding_torque - report.required_torque,
                                     math.inf if s.mass is None else s.mass, s.name))


def best_report(reports: Iterable[FeasibilityReport]) -> FeasibilityReport | None:
    """Feasible report needing the least torque (then least travel)."""
    feasible = [r for r in reports if r.feasible]
    if not feasible:
        return None
    return min(feasible, key=lambda r: (r.required_torque, r.theta_span, r.design))


@dataclass(frozen=True)
class TradeoffRow:
    design: str
    theta: float  # deg, extreme of largest magnitude
    throw: float  # mm
    blocked_force: float  # N, magnitude
    stiffness: float  # N/mm
    torque: float  # N*mm, magnitude


def tradeoff_table(models) -> list[TradeoffRow]:
    """Throw, force, stiffness and torque of each model at its twist extreme."""
    models = list(models)
    if not models:
        raise InputError("need at least one model")
    rows = []
    for m in models:
        th = m.theta_max if abs(m.theta_max) >= abs(m.theta_min) else m.theta_min
        base = min(max(0.0, m.theta_min), m.theta_max)
        rows.append(TradeoffRow(
            design=m.ident, theta=float(th),
            throw=float(abs(m.min_energy_length(th) - m.min_energy_length(base))),
            blocked_force=float(abs(m.blocked_force(th))),
            stiffness=float(m.spring_constant(th)),
            torque=float(abs(m.holding_torque(th))),
        ))
    return rows
