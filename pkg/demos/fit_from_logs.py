"""
From cycling-test logs to fitted constants
==========================================

Generate a noisy stepped-twist test log from known constants, write it to
CSV, read it back and fit.  Compare the recovered constants with the ones
that made the data.
"""

import tempfile
from pathlib import Path

import numpy as np

from hsakit import io as hio
from hsakit.design_space import TrajectoryPoint, builtin_spec
from hsakit.fitting import aggregate, cycle_properties, fit_record, segment_cycles
from hsakit.synthetic import generate_cycle_log

truth = hio.read_parameter_table()["closed-8"]
spec = builtin_spec(TrajectoryPoint.CLOSED, 8)
thetas = np.arange(0, 181, 30)

# Ten triangle cycles per twist step, 2% multiplicative noise on the force
# and torque channels.
record = generate_cycle_log(truth, spec.printed_length, thetas,
                            (spec.cycling_min, spec.cycling_max), noise=0.02, seed=0)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "closed-8.csv"
    hio.write_test_log(record, path)
    record = hio.parse_test_log(path)
print(f"{len(record)} samples, {len(segment_cycles(record))} cycles")

# Look at a single twist step first: per-cycle stiffness, first cycle dropped.
cycles = [c for c in segment_cycles(record) if c.theta[0] == 90.0]
points = aggregate(cycles, lambda c: cycle_properties(c).stiffness)
print(f"stiffness at 90 deg: median {points[0].median:.4f} "
      f"(range {points[0].min:.4f}..{points[0].max:.4f}) over {points[0].n_cycles} cycles")

# The whole pipeline in one call.
fit = fit_record(record, spec.printed_length, name="closed-8")
print(f"\n{'constant':<16}{'fitted':>12}{'truth':>12}{'error':>8}")
for name in ("force_quad", "force_lin", "torque_lin", "stiffness_slope",
             "rest_stiffness", "length_slope", "rest_length"):
    got, want = getattr(fit, name), getattr(truth, name)
    print(f"{name:<16}{got:12.5g}{want:12.5g}{abs(got - want) / abs(want):8.2%}")
print(f"R^2: force {fit.r2_blocked:.4f}, torque {fit.r2_torque:.4f}, "
      f"stiffness {fit.r2_stiffness:.4f}, length {fit.r2_length:.4f}")
