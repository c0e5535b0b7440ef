import pytest
from hypothesis import given, strategies as st

from hsakit.design_space import (
    CoilSpringParams,
    Handedness,
    HsaDesign,
    RotationEffect,
    RotationSense,
    TrajectoryPoint,
    builtin_spec,
    builtin_specs,
    coil_count,
    coil_spring_constant,
    design_id,
    load_design_points,
    parse_design_id,
    rest_stiffness_estimate,
    rotation_effect,
    rotation_sense,
)
from hsakit.errors import InputError, UnknownDesignPoint


@pytest.mark.parametrize("tp, rows, thetas, printed, cycling, zfd", [
    (TrajectoryPoint.CLOSED, 4, (0, 90, 30), 75, (0, 20.0), 2.7),
    (TrajectoryPoint.OPEN, 4, (-180, 0, 30), 122.2, (-3.4, 0), 0.6),
    (TrajectoryPoint.CLOSED, 12, (0, 180, 30), 124, (0, 60.0), 3.8),
])
def test_builtin_spec_rows(tp, rows, thetas, printed, cycling, zfd):
    s = builtin_spec(tp, rows)
    assert (s.theta_min, s.theta_max, s.theta_step) == thetas
    assert s.printed_length == printed
    assert (s.cycling_min, s.cycling_max) == cycling
    assert s.zero_force_displacement == zfd


def test_builtin_spec_unknown_point():
    with pytest.raises(UnknownDesignPoint):
        builtin_spec(TrajectoryPoint.OPEN, 12)


def test_builtin_specs_are_unique_and_ordered_by_coordinate():
    specs = builtin_specs()
    assert len({s.ident for s in specs}) == len(specs) == 7
    coords = {s.trajectory_point: s.trajectory_coordinate for s in specs}
    assert coords[TrajectoryPoint.CLOSED] < coords[TrajectoryPoint.SEMI_OPEN] < coords[TrajectoryPoint.OPEN]


def test_spec_theta_grid():
    assert builtin_spec(TrajectoryPoint.SEMI_OPEN, 4).thetas == [-90, -60, -30, 0, 30, 60, 90]


def test_design_point_header_is_checked(tmp_path):
    bad = tmp_path / "points.csv"
    bad.write_text("rows,trajectory_point\n4,closed\n")
    with pytest.raises(InputError):
        load_design_points(bad)


@pytest.mark.parametrize("hand, sense, effect", [
    (Handedness.LEFT, RotationSense.CLOCKWISE, RotationEffect.SHORTENS),
    (Handedness.LEFT, RotationSense.COUNTERCLOCKWISE, RotationEffect.EXTENDS),
    (Handedness.RIGHT, RotationSense.CLOCKWISE, RotationEffect.EXTENDS),
    (Handedness.RIGHT, RotationSense.COUNTERCLOCKWISE, RotationEffect.SHORTENS),
])
def test_rotation_effect(hand, sense, effect):
    assert rotation_effect(hand, sense) is effect


@pytest.mark.parametrize("hand", list(Handedness))
def test_positive_twist_always_extends(hand):
    assert rotation_effect(hand, rotation_sense(hand, 30.0)) is RotationEffect.EXTENDS
    assert rotation_effect(hand, rotation_sense(hand, -30.0)) is RotationEffect.SHORTENS
    assert rotation_sense(hand, 0.0) is None


@pytest.mark.parametrize("rows, order, expected", [(4, 3, 12), (1, 1, 1), (12, 3, 36)])
def test_coil_count(rows, order, expected):
    d = HsaDesign(Handedness.LEFT, TrajectoryPoint.CLOSED, rows, symmetry_order=order)
    assert coil_count(d) == expected


def test_coil_spring_constant_substitution():
    assert coil_spring_constant(CoilSpringParams(1, 2, 2, 1)) == pytest.approx(0.25)


def test_coil_spring_ratio_between_row_counts():
    base = dict(shear_modulus=800.0, wire_diameter=1.2, mean_coil_diameter=19.0)
    k12 = coil_spring_constant(CoilSpringParams(coil_count=12, **base))
    k36 = coil_spring_constant(CoilSpringParams(coil_count=36, **base))
    assert k12 / k36 == pytest.approx(3.0, rel=1e-15)


@given(n=st.floats(0.1, 1e3))
def test_coil_spring_inverse_in_coil_count(n):
    one = coil_spring_constant(CoilSpringParams(700.0, 1.5, 18.0, n))
    two = coil_spring_constant(CoilSpringParams(700.0, 1.5, 18.0, 2 * n))
    assert two == pytest.approx(one / 2)


def test_coil_spring_rejects_nonpositive():
    with pytest.raises(InputError):
        CoilSpringParams(0, 1, 1, 1)


@pytest.mark.parametrize("rows, expected, rel", [(4, 1.664, 1e-12), (12, 0.357, 2e-3), (8, 0.630, 2e-3)])
def test_rest_stiffness_estimate(rows, expected, rel):
    assert rest_stiffness_estimate(rows, 4, 1.664) == pytest.approx(expected, rel=rel)


def test_rest_stiffness_estimate_vs_measured(table):
    # the law tracks 12 rows closely but misses 8 rows by about a third
    assert rest_stiffness_estimate(12, 4, 1.664) == pytest.approx(table["closed-12"].rest_stiffness, rel=0.01)
    assert rest_stiffness_estimate(8, 4, 1.664) > 1.3 * table["closed-8"].rest_stiffness


@pytest.mark.parametrize("text", ["closed-8", "semi-open-4", "open-4"])
def test_design_id_round_trip(text):
    assert design_id(*parse_design_id(text)) == text


def test_design_validation():
    with pytest.raises(InputError):
        HsaDesign(Handedness.LEFT, TrajectoryPoint.CLOSED, 0)
    d = HsaDesign(Handedness.LEFT, TrajectoryPoint.CLOSED, 8)
    assert d.ident == "closed-8"
