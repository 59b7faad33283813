"""
Acceptance checks, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL`` line (bypassing
output capture) before asserting, so the verdicts appear in a plain
``pytest -v`` log. Studies shared between criteria live in module-scope
fixtures.
"""

import math
import time

import numpy as np
import pytest

from ellipticalou.dataio import load_polar_snapshot
from ellipticalou.experiments import FIG1_LEFT, FIG1_RIGHT, NARROWBAND, table2_config, table3_boot_configs
from ellipticalou.fourier import dft
from ellipticalou.params import EllipticalParams, GeometricParams, to_elliptical, to_geometric
from ellipticalou.polar import annual_fit, chandler_fit
from ellipticalou.sampling import ComplexSeries, SimConfig, simulate
from ellipticalou.spectral import (
    aliased_psd,
    appendix_b_oracle,
    autocovariance,
    comp_spectrum,
    fourier_grid,
    psd,
    psd_complex_ou,
)
from ellipticalou.uncertainty import PARAM_NAMES, bootstrap_study, run_monte_carlo
from ellipticalou.whittle import FitSpec, OptimizerConfig, fit


@pytest.fixture
def verdict(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return say


# --- 1 ----------------------------------------------------------------------


def _draw(rng):
    # the ranges the round-trip and oracle checks are stated for; rho is
    # kept off 0.05 itself since rho^4 amplifies rounding near the line limit
    return GeometricParams(
        alpha=1.0 - rng.uniform(0.0, 1.0),
        beta=rng.choice([-1, 1]) * (math.pi - rng.uniform(0.0, math.pi)),
        rho=1.0 - rng.uniform(0.0, 0.95),
        psi=rng.uniform(-math.pi / 2, math.pi / 2),
        a2=10.0 - rng.uniform(0.0, 10.0),
    )


def test_c1_mapping_round_trip(verdict):
    rng = np.random.default_rng(101)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        g = _draw(rng)
        back = to_geometric(to_elliptical(g))
        for name in ("alpha", "beta", "rho", "a2"):
            a, b = getattr(g, name), getattr(back, name)
            worst = max(worst, abs(a - b) / abs(a))
        # orientation compared modulo the half-turn wrap
        d = (back.psi - g.psi + math.pi / 2) % math.pi - math.pi / 2
        worst = max(worst, abs(d) / abs(g.psi))
    elapsed = time.perf_counter() - t
    r_left = to_elliptical(to_geometric(FIG1_LEFT)).r
    r_right = to_elliptical(to_geometric(FIG1_RIGHT)).r
    r_err = max(abs(r_left - (0.6 + 1j)), abs(r_right - (-0.09 - 0.09j)))
    ok = worst <= 1e-10 and elapsed < 5 and r_err <= 1e-12
    verdict(1, ok, f"max rel err {worst:.2e} (<=1e-10), r err {r_err:.1e} (<=1e-12), {elapsed:.2f}s (<5s)")
    assert ok


# --- 2 ----------------------------------------------------------------------


def test_c2_spectral_oracle(verdict):
    rng = np.random.default_rng(202)
    omegas = np.linspace(-math.pi, math.pi, 4096)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        g = _draw(rng)
        o = appendix_b_oracle(g, omegas)
        s_pos, s_neg, r = psd(g, omegas), psd(g, -omegas), comp_spectrum(g, omegas)
        worst = max(
            worst,
            np.max(np.abs(s_pos - o.s_pos) / s_pos),
            np.max(np.abs(s_neg - o.s_neg) / s_neg),
            np.max(np.abs(r - o.r_val) / np.abs(r)),
        )
    circ = GeometricParams(0.02, 0.8, 1.0, 0.3, 1.6)
    exact_reduction = bool(np.array_equal(psd(circ, omegas), psd_complex_ou(circ, omegas)))
    elapsed = time.perf_counter() - t
    ok = worst <= 1e-12 and exact_reduction and elapsed < 10
    verdict(2, ok, f"max rel err {worst:.2e} (<=1e-12), rho=1 exact: {exact_reduction}, {elapsed:.2f}s (<10s)")
    assert ok


# --- 3 ----------------------------------------------------------------------


def test_c3_autocovariance_cross_check(verdict):
    t = time.perf_counter()
    taus = np.array([0, 1, 2, 5])
    worst = 0.0
    for p in (FIG1_LEFT, FIG1_RIGHT):
        g = to_geometric(p)
        # the power spectrum folded onto the unit-interval Nyquist band is
        # exact in closed form; a dense Riemann sum then inverts it with
        # wrap-around error exp(-alpha n)
        grid = fourier_grid(2**17)
        dense = aliased_psd(g, grid.omegas, 1.0, None)
        numeric = np.mean(dense * np.exp(1j * np.outer(taus, grid.omegas)), axis=1)
        closed = autocovariance(g, taus)
        worst = max(worst, np.max(np.abs(numeric - closed) / np.abs(closed)))
    elapsed = time.perf_counter() - t
    ok = worst <= 1e-6 and elapsed < 5
    verdict(3, ok, f"max rel err {worst:.2e} (<=1e-6), {elapsed:.2f}s (<5s)")
    assert ok


# --- 4 ----------------------------------------------------------------------


def _mean_periodogram(substeps, method, reps=500, n=1024):
    acc = np.zeros(n)
    for i in range(reps):
        cfg = SimConfig(n_out=n, substeps=substeps, seed=404, replicate=i, burn_in=0.0, z0="stationary", method=method)
        acc += dft(simulate(FIG1_LEFT, cfg)).periodogram
    return acc / reps


def _region_errors(mean_i, grid):
    g = to_geometric(FIG1_LEFT)
    model = aliased_psd(g, grid.omegas, 1.0, 10)
    om = grid.omegas
    near = (np.abs(om - g.beta) < 0.3) | (np.abs(om + g.beta) < 0.3)
    far = ~near & (om != 0)
    # per-frequency Monte Carlo error is 1/sqrt(500) = 4.5%, so the
    # comparison is of power summed over each region
    return (
        abs(mean_i[near].sum() / model[near].sum() - 1),
        abs(mean_i[far].sum() / model[far].sum() - 1),
    )


def test_c4_simulation_spectrum(verdict):
    t = time.perf_counter()
    grid = fourier_grid(1024)
    near, far = _region_errors(_mean_periodogram(100, "stepwise"), grid)
    elapsed = time.perf_counter() - t
    ok = near <= 0.05 and far <= 0.15 and elapsed < 180
    verdict(4, ok, f"in-band power err {near:.1%} (<=5%), elsewhere {far:.1%} (<=15%), {elapsed:.0f}s (<180s)")
    assert ok


def test_c4_same_check_with_negligible_step_bias(verdict):
    # not a criterion: the same comparison with the Euler step shrunk
    # until its variance inflation is far below Monte Carlo error
    grid = fourier_grid(1024)
    near, far = _region_errors(_mean_periodogram(100_000, "aggregated"), grid)
    with_note = near <= 0.05 and far <= 0.15
    verdict("4-fine-step", with_note, f"in-band power err {near:.1%}, elsewhere {far:.1%}")
    assert with_note


# --- 5 and 6 -----------------------------------------------------------------


@pytest.fixture(scope="module")
def table2_study():
    specs = {"marginal-all": FitSpec(), "marginal-narrow": FitSpec(bands=NARROWBAND)}
    t = time.perf_counter()
    res = run_monte_carlo(table2_config(200, specs=specs))
    return res, time.perf_counter() - t


ENVELOPE = {"beta1": 3.0, "alpha2": 8.0, "beta2": 10.0, "sigma2": 12.0, "alpha1": 35.0}


def test_c5_desk_table2(table2_study, verdict):
    res, elapsed = table2_study
    full = res.methods["marginal-all"]
    nb = res.methods["marginal-narrow"]
    bias, rmse = full.bias_pct(), full.rmse_pct()
    inside = all(abs(bias[p]) <= lim and rmse[p] <= lim for p, lim in ENVELOPE.items())
    nb_rmse = nb.rmse_pct()
    nb_ok = 15 <= nb_rmse["sigma2"] <= 35 and nb_rmse["beta1"] <= 3
    ok = inside and nb_ok and elapsed < 1800 and full.failures == 0
    rm = ", ".join(f"{p} {rmse[p]:.2f}%" for p in PARAM_NAMES)
    verdict(
        5,
        ok,
        f"full-band RMSE {rm}; narrowband sigma2 {nb_rmse['sigma2']:.1f}% (15-35), beta1 {nb_rmse['beta1']:.2f}% (<=3); "
        f"failures {full.failures}/{nb.failures}; {elapsed:.0f}s (<1800s)",
    )
    assert ok


def test_c6_orientation_and_eccentricity(table2_study, verdict):
    res, _ = table2_study
    m = res.methods["marginal-all"]
    psi_mean = float(np.nanmean(m.psi))
    ecc_mean = float(np.nanmean(m.eccentricity))
    ok = abs(psi_mean - 0.51519) <= 0.05 and abs(ecc_mean - 0.85828) <= 0.03
    verdict(6, ok, f"mean psi {psi_mean:.4f} (0.51519+-0.05), mean eps {ecc_mean:.4f} (0.85828+-0.03)")
    assert ok


# --- 7 ----------------------------------------------------------------------


@pytest.mark.slow
def test_c7_desk_table3(table2_study, verdict):
    res, _ = table2_study
    mc_sd = res.methods["marginal-all"].sd_pct()
    t = time.perf_counter()
    boots = bootstrap_study(table2_config(200, specs={"m": FitSpec()}), FitSpec(), table3_boot_configs(100))
    elapsed = time.perf_counter() - t
    per = {k: dict(zip(PARAM_NAMES, np.nanmean(v, axis=0))) for k, v in boots.items()}
    ratios = {p: per["periodogram"][p] / mc_sd[p] for p in ("beta1", "alpha2", "beta2", "sigma2")}
    within = all(1 / 1.5 <= r <= 1.5 for r in ratios.values())
    smaller = sum(per["epanechnikov"][p] < per["periodogram"][p] for p in PARAM_NAMES)
    ok = within and smaller >= 4 and elapsed < 2700
    rtxt = ", ".join(f"{p} {r:.2f}" for p, r in ratios.items())
    verdict(7, ok, f"periodogram/MC SE ratios {rtxt} (1/1.5..1.5); smoothed smaller for {smaller}/5 (>=4); {elapsed:.0f}s (<2700s)")
    assert ok


# --- 8 ----------------------------------------------------------------------


def test_c8_proper_ar1(verdict):
    t = time.perf_counter()
    p = EllipticalParams(0.02, 1.0, 0.0, 0.0, 2.0)
    s = simulate(p, SimConfig(n_out=1_000_000, substeps=100_000, method="aggregated", seed=808, z0="stationary"))
    z0, z1 = s.values[:-1], s.values[1:]
    coef = np.vdot(z0, z1) / np.vdot(z0, z0)
    resid = z1 - coef * z0
    n = resid.size
    var_e = np.mean(np.abs(resid) ** 2)
    se_coef = math.sqrt(var_e / np.sum(np.abs(z0) ** 2))
    se_var = np.std(np.abs(resid) ** 2) / math.sqrt(n)
    want_coef = math.exp(-0.02) * complex(math.cos(1.0), math.sin(1.0))
    want_var = 2 * (1 - math.exp(-0.04)) / 0.04
    # complex coefficient: both parts within 3 SE of the truth
    z_re = abs(coef.real - want_coef.real) / (se_coef / math.sqrt(2))
    z_im = abs(coef.imag - want_coef.imag) / (se_coef / math.sqrt(2))
    z_var = abs(var_e - want_var) / se_var
    elapsed = time.perf_counter() - t
    ok = max(z_re, z_im) <= 3 and z_var <= 3 and elapsed < 60
    verdict(8, ok, f"coefficient off by {max(z_re, z_im):.2f} SE, innovation variance off by {z_var:.2f} SE (<=3), {elapsed:.1f}s (<60s)")
    assert ok


# --- 9 ----------------------------------------------------------------------


def test_c9_polar_motion(verdict):
    t = time.perf_counter()
    s = load_polar_snapshot()
    ch = chandler_fit(s).summary()["params"]
    an = annual_fit(s)
    ann = an.summary()
    elapsed = time.perf_counter() - t
    checks = {
        "alpha1 in [0.0167,0.102]": 0.0167 <= ch["alpha1"] <= 0.102,
        "beta1 in [-0.847,-0.835]": -0.847 <= ch["beta1"] <= -0.835,
        "sigma2 in [119,266]": 119 <= ch["sigma2"] <= 266,
        "annual eps in [0.639,0.915]": 0.639 <= ann["eccentricity"] <= 0.915,
        "annual psi within 0.03 of 0.125": abs(ann["psi_nonparametric"] - 0.125) <= 0.03,
        "np eps within 0.03 of 0.530": abs(ann["eccentricity_nonparametric"] - 0.530) <= 0.03,
    }
    ok = all(checks.values()) and elapsed < 120
    failed = [k for k, v in checks.items() if not v]
    verdict(
        9,
        ok,
        f"chandler alpha1 {ch['alpha1']:.4f}/yr, beta1 {ch['beta1']:.4f} cpy, sigma2 {ch['sigma2']:.0f}; "
        f"annual eps {ann['eccentricity']:.3f}, psi {ann['psi_nonparametric']:.3f}, np eps {ann['eccentricity_nonparametric']:.3f}; "
        f"{elapsed:.1f}s; failing: {failed or 'none'}",
    )
    assert ok


# --- 10 ---------------------------------------------------------------------


def test_c10_equivariance(verdict):
    rng = np.random.default_rng(1010)
    t = time.perf_counter()
    worst = 0.0
    psi_err = {"marginal": 0.0, "full": 0.0}
    for k in range(20):
        g = GeometricParams(
            alpha=rng.uniform(0.01, 0.1),
            beta=rng.choice([-1, 1]) * rng.uniform(0.3, 1.5),
            rho=rng.uniform(0.3, 0.95),
            psi=rng.uniform(-1.5, 1.5),
            a2=rng.uniform(0.5, 3.0),
        )
        s = simulate(to_elliptical(g), SimConfig(n_out=512, substeps=1000, method="aggregated", seed=1010, replicate=k, z0="stationary"))
        c, phi = rng.uniform(0.1, 10.0), rng.uniform(-math.pi, math.pi)
        moved = ComplexSeries(c * np.exp(1j * phi) * s.values, s.delta, s.t0)
        lik = "full" if k % 2 else "marginal"
        spec = FitSpec(likelihood=lik, optimizer=OptimizerConfig(restarts=1))
        a = fit(dft(s, mean_subtract=True), spec)
        b = fit(dft(moved, mean_subtract=True), spec)
        for name in ("alpha", "beta", "rho"):
            worst = max(worst, abs(getattr(b.geo, name) - getattr(a.geo, name)) / abs(getattr(a.geo, name)))
        worst = max(worst, abs(b.geo.a2 / (c * c) - a.geo.a2) / a.geo.a2)
        d = (b.psi_hat - a.psi_hat - phi + math.pi / 2) % math.pi - math.pi / 2
        psi_err[lik] = max(psi_err[lik], abs(d))
    elapsed = time.perf_counter() - t
    # the marginal orientation is read from transform phases, so it moves
    # with the data to rounding; under the full likelihood psi is itself a
    # fitted coordinate and is held to the optimizer tolerance like the rest
    ok = worst <= 1e-6 and psi_err["marginal"] <= 1e-12 and psi_err["full"] <= 1e-6 and elapsed < 300
    verdict(
        10,
        ok,
        f"max rel change {worst:.1e} (<=1e-6); psi shift error marginal {psi_err['marginal']:.1e} rad (<=1e-12), "
        f"full {psi_err['full']:.1e} rad (<=1e-6); {elapsed:.0f}s (<300s)",
    )
    assert ok
