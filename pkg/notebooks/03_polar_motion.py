"""Chandler wobble and annual oscillation in the bundled polar-motion record.

Run with ``python notebooks/03_polar_motion.py``. The record holds
monthly-ish (0.1 yr) samples of the pole position in mas.
"""

import json

from ellipticalou.dataio import load_polar_snapshot
from ellipticalou.polar import annual_fit, chandler_fit

s = load_polar_snapshot()
print(f"{s.n} samples from {s.t0:.2f} every {s.delta} yr")

ch = chandler_fit(s)
print("Chandler, circular model on the retrograde band:")
print(json.dumps(ch.summary()["params"], indent=2))
print(f"  period {365.25 / abs(ch.summary()['params']['beta1']):.1f} days")

an = annual_fit(s).summary()
print("Annual, elliptical with the frequency pinned to one cycle per year:")
for k in ("eccentricity", "eccentricity_nonparametric", "psi_nonparametric"):
    print(f"  {k}: {an[k]:.3f}")
# Only three Fourier frequencies fall on each side of the annual line at
# this record length, so the ellipse shape is loosely determined.
