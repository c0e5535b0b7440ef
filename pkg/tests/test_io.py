import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsakit import io as hio
from hsakit.errors import InputError, MalformedHeader, NonMonotoneTime, UnparseableRow
from hsakit.fitting import CycleTestRecord, cycle_theta, segment_cycles
from hsakit.relaxation import fit_relaxation

LOGS = hio.bundled("logs")


def log_text(*rows, header="time_s,displacement_mm,force_N,torque_Nmm,theta_deg"):
    return io.StringIO("\n".join([header, *rows]) + "\n")


def test_bundled_log_has_ten_cycles_per_step():
    rec = hio.parse_test_log(LOGS / "closed-4.csv")
    assert rec.design == "closed-4"
    assert rec.sample_rate == pytest.approx(50.0)
    cycles = segment_cycles(rec)
    per_step = {}
    for c in cycles:
        per_step[cycle_theta(c)] = per_step.get(cycle_theta(c), 0) + 1
    assert per_step == {float(t): 10 for t in range(0, 181, 30)}


def test_reordered_header():
    with pytest.raises(MalformedHeader):
        hio.parse_test_log(log_text("0,0,0,0,0", "1,0,0,0,0",
                                    header="displacement_mm,time_s,force_N,torque_Nmm,theta_deg"))


def test_duplicate_timestamp():
    with pytest.raises(NonMonotoneTime, match="line 3"):
        hio.parse_test_log(log_text("0,0,0,0,0", "0,1,0,0,0"))


def test_bad_number_reports_line():
    with pytest.raises(UnparseableRow) as err:
        hio.parse_test_log(log_text("0,0,0,0,0", "0.02,abc,0,0,0"))
    assert err.value.line == 3


def test_short_row_and_single_row():
    with pytest.raises(UnparseableRow):
        hio.parse_test_log(log_text("0,0,0,0,0", "0.02,1,0,0"))
    with pytest.raises(InputError):
        hio.parse_test_log(log_text("0,0,0,0,0"))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=30)
@given(data=st.lists(st.tuples(finite, finite, finite, finite), min_size=2, max_size=20),
       steps=st.lists(st.floats(1e-3, 10), min_size=20, max_size=20))
def test_log_write_parse_identity(data, steps):
    cols = np.array(data).T
    t = np.cumsum(steps[: len(data)])
    rec = CycleTestRecord(t, *cols)
    buf = io.StringIO()
    hio.write_test_log(rec, buf)
    buf.seek(0)
    assert hio.parse_test_log(buf) == rec


def test_parameter_table_round_trip(table, tmp_path):
    path = tmp_path / "t.ini"
    hio.write_parameter_table(table, path)
    again = hio.read_parameter_table(path)
    assert again == table
    assert [f.design for f in again.values()] == [f.design for f in table.values()]


def test_published_constants_are_verbatim(table):
    f = table["closed-12"]
    assert (f.force_quad, f.force_lin, f.r2_blocked) == (-3.1436e-4, 0.0115, 0.9878)
    assert (f.torque_lin, f.stiffness_slope, f.rest_stiffness) == (0.2039, 2.6294e-4, 0.3576)
    assert (f.length_slope, f.rest_length, f.r2_length) == (0.0608, 124.3016, 0.997)
    assert [t.design.printed_length for t in table.values()] == [75, 89, 100, 112, 124]


@pytest.mark.parametrize("text", [
    "[table]\nformat_version = 2\n",
    "[closed-4]\nA = 1\n",
    "[table]\nformat_version = 1\n[closed-4]\ntheta_min = 0\ntheta_max = 90\nA = 1\n",
])
def test_parameter_table_rejects(text, tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(InputError):
        hio.read_parameter_table(path)


def test_anchor_round_trip(anchors, tmp_path):
    path = tmp_path / "a.csv"
    path.write_text(hio.format_anchor_models(anchors.values()))
    again = hio.read_anchor_models(path)
    assert again == anchors


def test_relaxation_model_round_trip(hold_data, tmp_path):
    model = fit_relaxation(hold_data, reference_extension=12.0)
    path = tmp_path / "m.csv"
    hio.write_relaxation_model(model, path)
    again = hio.read_relaxation_model(path)
    assert again.reference_peak == model.reference_peak
    assert again.reference_extension == 12.0
    for (a1, t1), (a2, t2) in zip(again.modes, model.modes):
        assert a1 == pytest.approx(a2, rel=1e-11) and t1 == pytest.approx(t2, rel=1e-11)


def test_hold_test_must_increase():
    with pytest.raises(NonMonotoneTime):
        hio.parse_hold_test(io.StringIO("time_s,force_N\n0,5\n1,4\n1,3\n"))


def test_servo_catalog():
    cat = hio.read_servo_catalog()
    assert len(cat) == 7
    assert all(s.holding_torque > 0 and s.angle_range > 0 for s in cat)
    assert any(s.mass is None for s in cat)
    with pytest.raises(UnparseableRow):
        hio.read_servo_catalog(io.StringIO(
            "name,holding_torque_Nmm,angle_range_deg,speed_dps,mass_g\nbad,-5,180,,\n"))


def test_atomic_write_keeps_old_file_on_error(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    with pytest.raises(RuntimeError):
        with hio.atomic_write(path) as fh:
            fh.write("partial")
            raise RuntimeError("boom")
    assert path.read_text() == "old"
    assert list(tmp_path.iterdir()) == [path]


def test_manifest_describes_fixtures():
    manifest = json.loads((LOGS / "manifest.json").read_text())
    assert set(manifest["logs"]) == {"closed-4.csv", "closed-8.csv"}
    assert manifest["settings"]["seed"] == 0


def test_fixtures_regenerate_identically(tmp_path):
    from hsakit.fixtures import GOLDEN_TABLE, build

    build(tmp_path)
    for name in ("closed-4.csv", "closed-8.csv", "manifest.json", GOLDEN_TABLE):
        assert (tmp_path / name).read_bytes() == (LOGS / name).read_bytes(), name
