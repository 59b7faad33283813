"""A small Monte Carlo and bootstrap study on the left parameter set.

Run with ``python notebooks/02_estimation_study.py [n_reps]``. The default
of 20 replicates finishes in about a minute; the acceptance suite runs the
200-replicate version.
"""

import sys

from ellipticalou.experiments import NARROWBAND, table2_config
from ellipticalou.uncertainty import PARAM_NAMES, BootstrapConfig, bootstrap, run_monte_carlo, simulate_replicate
from ellipticalou.fourier import dft
from ellipticalou.whittle import FitSpec, fit

n_reps = int(sys.argv[1]) if len(sys.argv) > 1 else 20
specs = {"all frequencies": FitSpec(), "narrow band": FitSpec(bands=NARROWBAND)}
cfg = table2_config(n_reps, specs=specs)
res = run_monte_carlo(cfg)

print(f"{n_reps} replicates, n={cfg.n}")
print("method            " + "".join(f"{p:>9}" for p in PARAM_NAMES))
for label, m in res.methods.items():
    rm = m.rmse_pct()
    print(f"{label:<18}" + "".join(f"{rm[p]:9.2f}" for p in PARAM_NAMES) + "   (RMSE %)")

# Narrowing the band leaves the frequency well determined but makes the
# noise level hard to pin down: only the peak is seen, not the floor.

sd = dft(simulate_replicate(cfg, 0), mean_subtract=True)
base = fit(sd, FitSpec())
truth = res.methods["all frequencies"].truth
for est in ("raw_periodogram", "epanechnikov"):
    b = bootstrap(sd, base, FitSpec(), BootstrapConfig(n_boot=50, seed=3, spectral_estimator=est))
    print(f"bootstrap SE % ({est}):", {p: round(float(100 * b.se[p] / abs(v)), 2) for p, v in zip(PARAM_NAMES, truth)})
