"""
Choosing a design and a servo
=============================

Evaluate every bundled design against a requirement, pick the one needing
the least torque and rank servos for it.
"""

from hsakit import io as hio
from hsakit.errors import ModeUnsupported
from hsakit.motor_select import (
    ActuationMode,
    ActuationRequirement,
    best_report,
    evaluate_design,
    rank_servos,
)
from hsakit.relaxation import fit_relaxation

models = dict(hio.read_parameter_table())
for ident, model in hio.read_anchor_models().items():
    models.setdefault(ident, model)
catalog = hio.read_servo_catalog()
relax = fit_relaxation(hio.parse_hold_test(hio.bundled("relaxation_hold.csv")))


def select(req, relax=None):
    print(f"\n{req.mode.value} {req.required_force:g} N"
          + (f", held {req.hold_duration:g} s" if req.hold_duration else ""))
    reports = []
    for ident, model in models.items():
        try:
            reports.append(evaluate_design(model, req, relax))
        except ModeUnsupported:
            continue
    best = best_report(reports)
    if best is None:
        print("  nothing feasible:", "; ".join(n for r in reports for n in r.notes))
        return
    print(f"  {best.design}: twist {best.required_theta:.1f} deg, torque {best.required_torque:.1f} N*mm")
    for servo in rank_servos(catalog, best)[:3]:
        print(f"    {servo.name} ({servo.holding_torque:g} N*mm)")


select(ActuationRequirement(ActuationMode.PUSH, 8.0))
select(ActuationRequirement(ActuationMode.PULL, 100.0))
# The same pull, held for a second: relaxation raises the force target.
select(ActuationRequirement(ActuationMode.PULL, 100.0, hold_duration=1.0), relax)
select(ActuationRequirement(ActuationMode.BIDIRECTIONAL, 5.0))
select(ActuationRequirement(ActuationMode.PUSH, 200.0))
