import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsakit.errors import EmptyCatalog, InputError, ModeUnsupported
from hsakit.motor_select import (
    ActuationMode,
    ActuationRequirement,
    FeasibilityReport,
    ServoSpec,
    best_report,
    evaluate_design,
    rank_servos,
    tradeoff_table,
)
from hsakit.relaxation import RelaxationModel, retained_fraction

PUSH, PULL, BOTH = ActuationMode.PUSH, ActuationMode.PULL, ActuationMode.BIDIRECTIONAL


def report(torque, span, feasible=True):
    return FeasibilityReport("x", PULL, -span, torque, 100.0, 1.0, feasible, 100.0, theta_span=span)


def test_open_pull_hundred_newtons(anchors):
    rep = evaluate_design(anchors["open-4"], ActuationRequirement(PULL, 100.0))
    assert rep.feasible
    # oracle: invert the straight anchor segment from (0, 0) to (-180, 124)
    assert rep.required_theta == pytest.approx(-180 * 100 / 124, abs=1e-6)
    th = rep.required_theta
    assert rep.required_torque == pytest.approx(abs(-1.219e-4 * th**2 + 0.1834 * th), rel=1e-9)
    assert rep.required_torque == pytest.approx(29.2, abs=0.5)
    assert rep.achievable_force == pytest.approx(124.0)
    assert rep.derated_force == rep.achievable_force


def test_push_two_hundred_is_infeasible_everywhere(table, anchors):
    req = ActuationRequirement(PUSH, 200.0)
    models = list(table.values()) + [anchors["closed-4"], anchors["semi-open-4"]]
    assert not any(evaluate_design(m, req).feasible for m in models)
    with pytest.raises(ModeUnsupported):
        evaluate_design(anchors["open-4"], req)


@pytest.mark.parametrize("ident", ["closed-4", "open-4"])
def test_bidirectional_mode_gate(anchors, ident):
    with pytest.raises(ModeUnsupported):
        evaluate_design(anchors[ident], ActuationRequirement(BOTH, 5.0))


def test_bidirectional_semi_open(anchors):
    rep = evaluate_design(anchors["semi-open-4"], ActuationRequirement(BOTH, 5.0))
    assert rep.feasible
    assert rep.theta_span == pytest.approx(2 * 90 * 5 / 8.9, abs=1e-6)


def test_closed_models_cannot_pull(table):
    with pytest.raises(ModeUnsupported):
        evaluate_design(table["closed-8"], ActuationRequirement(PULL, 1.0))


def test_non_monotone_force_is_rejected(table):
    # 12 rows: A*th^2 + B*th with B > 0 first pulls, then pushes
    rep = evaluate_design(table["closed-12"], ActuationRequirement(PUSH, 1.0))
    assert not rep.feasible
    assert any("not monotone" in n for n in rep.notes)


def test_stroke_and_stiffness_checks(closed4):
    rep = evaluate_design(closed4, ActuationRequirement(PUSH, 5.0, required_stroke=50.0))
    assert not rep.feasible and rep.achievable_stroke == pytest.approx(0.0531 * 180)
    rep = evaluate_design(closed4, ActuationRequirement(PUSH, 5.0, required_stiffness=10.0))
    assert not rep.feasible


@settings(max_examples=25, deadline=None)
@given(force=st.floats(0.5, 29.0))
def test_required_theta_is_minimal(closed4, force):
    rep = evaluate_design(closed4, ActuationRequirement(PUSH, force))
    th = rep.required_theta
    assert abs(closed4.blocked_force(th)) >= force * (1 - 1e-9)
    grid = np.arange(0.1, th, 0.1)
    grid = grid[grid < th - 1e-9]
    assert np.all(np.abs(closed4.blocked_force(grid)) < force)


def test_relaxation_derating(anchors):
    relax = RelaxationModel.from_peak(10.0, [(5.0, 10.0)])
    req = ActuationRequirement(PULL, 50.0, hold_duration=10.0)
    rep = evaluate_design(anchors["open-4"], req, relax)
    frac = retained_fraction(relax, 10.0)
    assert rep.derated_force == pytest.approx(rep.achievable_force * frac)
    plain = evaluate_design(anchors["open-4"], ActuationRequirement(PULL, 50.0 / frac))
    assert rep.required_theta == pytest.approx(plain.required_theta)


@pytest.mark.parametrize("hold", [None, 0.0])
def test_no_hold_means_no_derating(anchors, hold):
    relax = RelaxationModel.from_peak(10.0, [(5.0, 1.0)])
    rep = evaluate_design(anchors["open-4"], ActuationRequirement(PULL, 50.0, hold_duration=hold), relax)
    assert rep.derated_force == rep.achievable_force


def test_rank_filters_on_torque_and_range():
    cat = [ServoSpec("S1", 40.0, 180.0), ServoSpec("S2", 500.0, 90.0)]
    assert [s.name for s in rank_servos(cat, report(36.96, 180.0), 1.0)] == ["S1"]
    assert rank_servos(cat, report(36.96, 180.0), 1.2) == []


def test_rank_prefers_lighter_on_ties():
    cat = [ServoSpec("heavy", 100.0, 180.0, mass=20.0), ServoSpec("light", 100.0, 180.0, mass=10.0),
           ServoSpec("unknown", 100.0, 180.0)]
    assert [s.name for s in rank_servos(cat, report(10.0, 90.0))] == ["light", "heavy", "unknown"]


def test_rank_errors():
    with pytest.raises(EmptyCatalog):
        rank_servos([], report(10.0, 90.0))
    with pytest.raises(InputError):
        rank_servos([ServoSpec("a", 100.0, 180.0)], report(10.0, 90.0, feasible=False))


@given(torques=st.lists(st.floats(1, 1000), min_size=1, max_size=8),
       need=st.floats(1, 300))
def test_rank_is_sorted_subset(torques, need):
    cat = [ServoSpec(f"s{i}", t, 180.0, mass=float(i)) for i, t in enumerate(torques)]
    ranked = rank_servos(cat, report(need, 90.0))
    assert all(s in cat for s in ranked)
    keys = [(s.holding_torque - need, s.mass, s.name) for s in ranked]
    assert keys == sorted(keys)
    assert all(s.holding_torque >= 1.5 * need for s in ranked)


def test_best_report_least_torque():
    a, b = report(30.0, 90.0), report(20.0, 120.0)
    assert best_report([a, b, report(5.0, 10.0, feasible=False)]) is b
    assert best_report([]) is None


def test_tradeoff_torque_falls_with_rows(table):
    rows = tradeoff_table(table.values())
    assert [r.design for r in rows] == ["closed-4", "closed-6", "closed-8", "closed-10", "closed-12"]
    torques = [r.torque for r in rows]
    assert all(a > b for a, b in zip(torques, torques[1:]))
    assert torques[0] == pytest.approx(171.81) and torques[-1] == pytest.approx(0.2039 * 180)


def test_tradeoff_throw_values(table):
    # throw is C_l * 180; it is not monotone in rows for the published constants
    throws = {r.design: r.throw for r in tradeoff_table(table.values())}
    assert throws["closed-4"] == pytest.approx(9.558)
    assert throws["closed-12"] == pytest.approx(10.944)
    assert throws["closed-4"] < throws["closed-12"]


def test_tradeoff_single_model(closed4):
    (row,) = tradeoff_table([closed4])
    assert row.blocked_force == abs(closed4.blocked_force(180.0))
    assert row.stiffness == closed4.spring_constant(180.0)
