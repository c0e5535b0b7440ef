"""
Stress relaxation under a held extension
========================================

Fit a plateau plus two exponential modes to a six-point hold test and ask
how long the actuator can hold before losing 5% of its force.
"""

import numpy as np

from hsakit import io as hio
from hsakit.relaxation import fit_relaxation, force_at_time, max_hold_time, retained_fraction

hold = hio.parse_hold_test(hio.bundled("relaxation_hold.csv"))
model = fit_relaxation(hold)
print(f"plateau {model.plateau:.2f} N, modes:")
for amp, tau in model.modes:
    print(f"  {amp:6.3f} N with tau = {tau:.3g} s")

print("\n  t_s    measured   model")
for t, f in hold:
    print(f"{t:7.1f}  {f:8.2f}  {force_at_time(model, t):8.2f}")

# Fitting one exponential per time window instead gives separate time
# constants, but it ignores the plateau inside each window.
windowed = fit_relaxation(hold, windows=[(0, 0.16), (0.16, 1.2)])
print("\nwindowed time constants:", ", ".join(f"{t:.3g} s" for t in windowed.time_constants))

for frac in (0.99, 0.95, 0.9, 0.75):
    t = max_hold_time(model, frac)
    print(f"keeps {frac:.0%} of peak for {t:.3g} s")

times = np.array([0.01, 0.1, 1, 10, 100, 1000])
print("retained:", " ".join(f"{r:.3f}" for r in retained_fraction(model, times)))
