"""
Programmable-spring fits for closed designs
===========================================

Load the bundled fit table, evaluate one design, and compare row counts.
"""

import numpy as np

from hsakit import io as hio
from hsakit.fitting import fit_power_law
from hsakit.motor_select import tradeoff_table
from hsakit.spring_model import consistency_report, force_direction, theta_for_length

table = hio.read_parameter_table()
four = table["closed-4"]

# Evaluate the 4-row design at a quarter turn.  Negative force means the
# actuator pushes against whatever holds it at its untwisted length.
theta = 90.0
fb = four.blocked_force(theta)
print(f"closed-4 at {theta:g} deg:")
print(f"  blocked force  {fb:8.3f} N ({force_direction(fb).value})")
print(f"  spring const.  {four.spring_constant(theta):8.3f} N/mm")
print(f"  length         {four.min_energy_length(theta):8.3f} mm")
print(f"  holding torque {four.holding_torque(theta):8.3f} N*mm")

# Going the other way: which twist gives an 80 mm actuator?
print(f"  80 mm needs {theta_for_length(four, 80.0):.1f} deg")

# More rows need less torque but also push less.
print("\ndesign      throw_mm  |F_b|_N  k_N/mm  torque_Nmm   (at 180 deg)")
for row in tradeoff_table(table.values()):
    print(f"{row.design:<11} {row.throw:8.2f} {row.blocked_force:8.2f} {row.stiffness:7.3f} {row.torque:10.1f}")

# Untwisted stiffness follows a power law in the number of rows.
law = fit_power_law([(f.design.rows, f.rest_stiffness) for f in table.values()])
print(f"\nk0 ~ {law.coefficient:.2f} * rows^{law.exponent:.3f}  (log-log R^2 {law.r_squared:.3f})")

# The four fits are independent.  Holding the untwisted length should load
# the spring by k * (L - L0); the report shows how far the force fit is
# from that estimate.
rep = consistency_report(four, samples=7)
for th, d in zip(rep.thetas, rep.discrepancy):
    print(f"  {th:5.0f} deg  relative gap {d:5.2f}")
print(f"largest gap {np.max(rep.discrepancy):.2f}")
