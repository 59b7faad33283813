"""
Frequency-domain bootstrap and Monte Carlo replication.

The bootstrap multiplies a spectral estimate by independent unit-mean
exponential variables at every Fourier frequency and refits each resampled
periodogram with the marginal Whittle likelihood. A resampled periodogram
carries no phase, so the orientation stays at its point estimate when
draws are mapped back to (alpha2, beta2).

``run_monte_carlo`` simulates replicate series from known parameters,
fits each with one or more ``FitSpec`` and tabulates bias and RMSE as
percentages of the truth.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Mapping, Sequence

import numpy as np
from scipy.stats import gaussian_kde

from .fourier import SpectralData, dft, smooth_periodogram
from .params import EllipticalParams, GeometricParams
from .sampling import ComplexSeries, SimConfig, make_rng, simulate
from .spectral import aliased_psd
from .whittle import FitResult, FitSpec, OptimizerConfig, fit, fit_periodogram, used_frequencies

__all__ = [
    "PARAM_NAMES",
    "BootstrapConfig",
    "BootstrapResult",
    "bootstrap",
    "bootstrap_spectrum",
    "McConfig",
    "McResult",
    "MethodSummary",
    "run_monte_carlo",
    "simulate_replicate",
    "kernel_density_export",
    "bootstrap_study",
    "default_jobs",
]

PARAM_NAMES = ("alpha1", "beta1", "alpha2", "beta2", "sigma2")

# Resampled fits start from the point estimate, so a coarser stopping rule
# loses nothing measurable at the bootstrap's own resolution.
BOOT_OPTIMIZER = OptimizerConfig(restarts=0, polish=False, tol_rel=1e-6, xtol=1e-4)

JOBS_ENV = "ELLIPTICALOU_JOBS"


def default_jobs() -> int:
    """Worker count from the ELLIPTICALOU_JOBS environment variable (default 1)."""
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None


def _run_tasks(fn: Callable[[int], object], indices: Sequence[int], n_jobs: int | None) -> list:
    # results come back in index order whatever the completion order
    n_jobs = default_jobs() if n_jobs is None else n_jobs
    if n_jobs <= 1 or len(indices) < 2:
        return [fn(i) for i in indices]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(fn)(i) for i in indices)


def _ell_vector(ell: EllipticalParams) -> np.ndarray:
    return np.array([ell.alpha1, ell.beta1, ell.alpha2, ell.beta2, ell.sigma2])


# --- bootstrap --------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapConfig:
    n_boot: int = 100
    spectral_estimator: Literal["raw_periodogram", "epanechnikov"] = "raw_periodogram"
    bandwidth: float = 0.07
    seed: int = 0
    ci_level: float = 0.95
    psi_policy: Literal["hold_at_point_estimate"] = "hold_at_point_estimate"
    optimizer: OptimizerConfig = BOOT_OPTIMIZER

    def __post_init__(self):
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if self.spectral_estimator not in ("raw_periodogram", "epanechnikov"):
            raise ValueError(f"unknown spectral estimator {self.spectral_estimator!r}")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must lie in (0, 1)")
        if self.psi_policy != "hold_at_point_estimate":
            raise ValueError(f"unknown psi policy {self.psi_policy!r}")
        if self.spectral_estimator == "epanechnikov" and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")


@dataclass(frozen=True)
class BootstrapResult:
    """Per-parameter bootstrap summaries.

    ``estimates`` has one row per surviving replicate and columns
    ``PARAM_NAMES + ("eccentricity",)``.
    """

    point: dict[str, float]
    se: dict[str, float]
    ci: dict[str, tuple[float, float]]
    estimates: np.ndarray
    n_failed: int
    n_boot: int
    ci_level: float

    @property
    def failed(self) -> bool:
        return self.n_failed > 0.2 * self.n_boot

    def se_percent(self) -> dict[str, float]:
        return {k: 100 * v / abs(self.point[k]) if self.point[k] != 0 else math.nan for k, v in self.se.items()}

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "se": self.se,
            "se_percent": self.se_percent(),
            "ci": {k: list(v) for k, v in self.ci.items()},
            "ci_level": self.ci_level,
            "n_boot": self.n_boot,
            "n_failed": self.n_failed,
            "failed": self.failed,
        }


COLUMNS = PARAM_NAMES + ("eccentricity",)


def bootstrap_spectrum(sd: SpectralData, cfg: BootstrapConfig) -> np.ndarray:
    """The spectral estimate that the exponential multipliers scale."""
    if cfg.spectral_estimator == "raw_periodogram":
        return np.asarray(sd.periodogram, dtype=float)
    return smooth_periodogram(sd, cfg.bandwidth)


def bootstrap(
    sd: SpectralData,
    base_fit: FitResult,
    spec: FitSpec,
    cfg: BootstrapConfig,
    s_hat: np.ndarray | None = None,
    n_jobs: int | None = 1,
) -> BootstrapResult:
    """Dahlhaus-style multiplier bootstrap of a Whittle fit.

    Parameters
    ----------
    sd : SpectralData
        Transform of the observed series.
    base_fit : FitResult
        Point estimate; must have converged. Its psi is held fixed.
    spec : FitSpec
        Model and bands for the refits (the likelihood is forced to marginal).
    cfg : BootstrapConfig
    s_hat : ndarray, optional
        Override the spectral estimate (one value per grid frequency).

    Returns
    -------
    BootstrapResult
        Sample standard deviations and percentile intervals over the
        replicates that converged. Non-converged replicates are dropped
        and counted, never retried.
    """
    if not base_fit.converged:
        raise ValueError("bootstrap needs a converged point estimate")
    if s_hat is None:
        s_hat = bootstrap_spectrum(sd, cfg)
    s_hat = np.asarray(s_hat, dtype=float)
    if s_hat.shape != sd.omegas.shape:
        raise ValueError("spectral estimate must have one value per grid frequency")
    opt = replace(cfg.optimizer, init=base_fit.geo)
    bspec = replace(spec, likelihood="marginal", optimizer=opt)
    mask = used_frequencies(sd, bspec)
    psi = base_fit.psi_hat

    def one(b: int):
        rng = make_rng(cfg.seed, b)
        mult = rng.standard_exponential(s_hat.size)
        star = np.where(mask, s_hat * mult, 0.0)
        res = fit_periodogram(sd.with_periodogram(star), bspec, psi)
        if not res.converged:
            return None
        return np.append(_ell_vector(res.ell), res.eccentricity)

    rows = _run_tasks(one, list(range(cfg.n_boot)), n_jobs)
    kept = [r for r in rows if r is not None]
    est = np.array(kept).reshape(-1, len(COLUMNS))
    point = dict(zip(COLUMNS, np.append(_ell_vector(base_fit.ell), base_fit.eccentricity).tolist()))
    tail = 100 * (1 - cfg.ci_level) / 2
    se, ci = {}, {}
    for j, name in enumerate(COLUMNS):
        col = est[:, j]
        if col.size >= 2:
            se[name] = float(np.std(col, ddof=1))
            lo, hi = np.percentile(col, [tail, 100 - tail])
            ci[name] = (float(lo), float(hi))
        else:
            se[name] = math.nan
            ci[name] = (math.nan, math.nan)
    return BootstrapResult(point, se, ci, est, cfg.n_boot - len(kept), cfg.n_boot, cfg.ci_level)


# --- Monte Carlo ------------------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    """Replication study setup.

    ``fit_specs`` maps a label to a FitSpec; a plain sequence is labelled
    by likelihood and band. Series are drawn with the aggregated Euler law
    at ``substeps`` per sample, fine enough that discretization bias sits
    well below Monte Carlo error.
    """

    n_reps: int
    true_params: EllipticalParams
    n: int = 1759
    delta: float = 1.0
    fit_specs: Mapping[str, FitSpec] | Sequence[FitSpec] = field(default_factory=lambda: {"marginal": FitSpec()})
    seed: int = 0
    substeps: int = 10_000
    method: Literal["stepwise", "aggregated"] = "aggregated"

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValueError("n_reps must be at least 1")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        self.true_params.validate()

    def labelled_specs(self) -> dict[str, FitSpec]:
        if isinstance(self.fit_specs, Mapping):
            return dict(self.fit_specs)
        out = {}
        for i, s in enumerate(self.fit_specs):
            band = "all" if isinstance(s.bands, str) else "band"
            label = f"{s.likelihood}-{band}"
            if label in out:
                label = f"{label}-{i}"
            out[label] = s
        return out


def simulate_replicate(cfg: McConfig, index: int) -> ComplexSeries:
    """Series number ``index`` of the study; deterministic in (seed, index)."""
    sim = SimConfig(
        n_out=cfg.n,
        delta_out=cfg.delta,
        substeps=cfg.substeps,
        seed=cfg.seed,
        replicate=index,
        method=cfg.method,
        z0="stationary",
    )
    return simulate(cfg.true_params, sim)


@dataclass(frozen=True)
class MethodSummary:
    """Bias, RMSE and spread as percentages of the true value.

    ``estimates`` holds one row per replicate (NaN where the fit failed)
    with columns ``PARAM_NAMES``; ``psi`` and ``eccentricity`` likewise.
    """

    label: str
    estimates: np.ndarray
    psi: np.ndarray
    eccentricity: np.ndarray
    truth: np.ndarray
    failures: int

    @property
    def ok(self) -> np.ndarray:
        return ~np.isnan(self.estimates).any(axis=1)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.estimates.shape[0]

    def _dev(self) -> np.ndarray:
        good = self.estimates[self.ok]
        return 100 * (good - self.truth) / np.abs(self.truth)

    def bias_pct(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES, self._dev().mean(axis=0).tolist()))

    def rmse_pct(self) -> dict[str, float]:
        d = self._dev()
        return dict(zip(PARAM_NAMES, np.sqrt((d * d).mean(axis=0)).tolist()))

    def sd_pct(self) -> dict[str, float]:
        # population form so that rmse^2 = bias^2 + sd^2 holds exactly
        return dict(zip(PARAM_NAMES, self._dev().std(axis=0).tolist()))

    def rows(self) -> list[dict]:
        b, r, s = self.bias_pct(), self.rmse_pct(), self.sd_pct()
        return [
            {"method": self.label, "parameter": p, "bias_pct": b[p], "rmse_pct": r[p], "sd_pct": s[p]}
            for p in PARAM_NAMES
        ]


@dataclass(frozen=True)
class McResult:
    methods: dict[str, MethodSummary]
    n_reps: int

    def table(self) -> list[dict]:
        out = []
        for m in self.methods.values():
            for row in m.rows():
                row["failure_rate"] = m.failure_rate
                out.append(row)
        return out


def run_monte_carlo(
    cfg: McConfig,
    n_jobs: int | None = 1,
    periodogram_override: Callable[[SpectralData], np.ndarray] | None = None,
) -> McResult:
    """Simulate ``cfg.n_reps`` series and fit each with every spec.

    ``periodogram_override`` replaces each replicate's periodogram (and drops
    its phases) before fitting; with the exact model spectrum it turns the
    study into a noise-free consistency check.
    """
    specs = cfg.labelled_specs()
    truth = _ell_vector(cfg.true_params)

    def one(i: int):
        series = simulate_replicate(cfg, i)
        out = {}
        for label, spec in specs.items():
            sd = dft(series, mean_subtract=spec.mean_subtract)
            if periodogram_override is not None:
                sd = sd.with_periodogram(periodogram_override(sd))
            try:
                res = fit(sd, spec)
            except (ValueError, ArithmeticError):
                res = None
            if res is None or not res.converged:
                out[label] = None
            else:
                out[label] = (_ell_vector(res.ell), res.psi_hat, res.eccentricity)
        return out

    per_rep = _run_tasks(one, list(range(cfg.n_reps)), n_jobs)
    methods = {}
    for label in specs:
        est = np.full((cfg.n_reps, len(PARAM_NAMES)), np.nan)
        psi = np.full(cfg.n_reps, np.nan)
        ecc = np.full(cfg.n_reps, np.nan)
        fails = 0
        for i, rep in enumerate(per_rep):
            got = rep[label]
            if got is None:
                fails += 1
                continue
            est[i], psi[i], ecc[i] = got
        methods[label] = MethodSummary(label, est, psi, ecc, truth, fails)
    return McResult(methods, cfg.n_reps)


def kernel_density_export(estimates: np.ndarray, grid: np.ndarray, truth: np.ndarray | None = None) -> np.ndarray:
    """Gaussian kernel densities of percentage deviations, one column per parameter.

    With ``truth`` given the density is of 100 (theta_hat - theta)/|theta|,
    otherwise of the raw values. Bandwidths follow Silverman's rule.

    Returns
    -------
    ndarray of shape (len(grid), n_params)
    """
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    if est.shape[0] == 1 and est.shape[1] > 1 and truth is None:
        est = est.T
    est = est[~np.isnan(est).any(axis=1)]
    if est.shape[0] < 2:
        raise ValueError("need at least two estimates per parameter")
    if truth is not None:
        t = np.asarray(truth, dtype=float)
        est = 100 * (est - t) / np.abs(t)
    grid = np.asarray(grid, dtype=float)
    out = np.empty((grid.size, est.shape[1]))
    for j in range(est.shape[1]):
        col = est[:, j]
        if np.ptp(col) == 0:
            raise ValueError(f"estimates in column {j} have zero spread")
        out[:, j] = gaussian_kde(col, bw_method="silverman")(grid)
    return out


def bootstrap_study(
    cfg: McConfig,
    spec: FitSpec,
    boot_cfgs: Mapping[str, BootstrapConfig],
    n_series: int | None = None,
    n_jobs: int | None = 1,
    progress: Callable[[int], None] | None = None,
) -> dict[str, np.ndarray]:
    """Bootstrap standard errors (percent of truth) for each replicate series.

    Returns, for every bootstrap configuration, an array of shape
    (n_series, len(PARAM_NAMES)) with NaN rows for series whose base fit
    or bootstrap failed.
    """
    n_series = cfg.n_reps if n_series is None else n_series
    truth = np.abs(_ell_vector(cfg.true_params))

    def one(i: int):
        series = simulate_replicate(cfg, i)
        sd = dft(series, mean_subtract=spec.mean_subtract)
        row = {k: np.full(len(PARAM_NAMES), np.nan) for k in boot_cfgs}
        try:
            base = fit(sd, spec)
        except (ValueError, ArithmeticError):
            return row
        if not base.converged:
            return row
        for k, bc in boot_cfgs.items():
            res = bootstrap(sd, base, spec, replace(bc, seed=bc.seed + i), n_jobs=1)
            if not res.failed:
                row[k] = 100 * np.array([res.se[p] for p in PARAM_NAMES]) / truth
        if progress is not None:
            progress(i)
        return row

    rows = _run_tasks(one, list(range(n_series)), n_jobs)
    return {k: np.array([r[k] for r in rows]) for k in boot_cfgs}


def model_spectrum(g: GeometricParams, sd: SpectralData, k_max: int | None = 10) -> np.ndarray:
    """Aliased model spectrum on the grid of ``sd``; a convenient exact S-hat."""
    return aliased_psd(g, sd.omegas, sd.grid.delta, k_max)
