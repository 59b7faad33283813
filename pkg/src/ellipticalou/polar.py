"""
Chandler wobble and annual oscillation fits to polar motion.

Series are in years and milliarcseconds, so internal frequencies are in
radians per year. Reported numbers use the customary mixed frame:

* alpha1 in 1/year;
* beta1, alpha2, beta2 in cycles per year (radians per year / 2 pi), so
  that sqrt(beta1^2 - alpha2^2 - beta2^2) is the oscillation frequency in
  cycles per year;
* sigma^2 in mas^2 per sampling interval (per-year value times delta).

The last two are what make a fitted Chandler variance sigma^2/(2 alpha1)
come out in the usual 10^4 mas^2 range with alpha1 near 0.04/yr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fourier import SpectralData, dft, peak_frequency
from .params import EllipticalParams
from .sampling import ComplexSeries
from .uncertainty import BootstrapConfig, BootstrapResult, bootstrap
from .whittle import FitResult, FitSpec, estimate_eccentricity_np, estimate_orientation, fit

__all__ = [
    "CPY",
    "CHANDLER_BAND",
    "ANNUAL_BAND",
    "cpy_bands",
    "report_scale",
    "to_report_units",
    "PolarFit",
    "chandler_fit",
    "chandler_elliptical_fit",
    "annual_fit",
]

CPY = 2 * math.pi  # radians per year in one cycle per year

CHANDLER_BAND = (-0.97, -0.70)
ANNUAL_BAND = (0.97, 1.03)


def cpy_bands(bands_cpy):
    return [(lo * CPY, hi * CPY) for lo, hi in bands_cpy]


def report_scale(delta: float) -> dict[str, float]:
    """Divisors taking internal (per-year, radian) values to the reported frame."""
    return {"alpha1": 1.0, "beta1": CPY, "alpha2": CPY, "beta2": CPY, "sigma2": 1.0 / delta, "eccentricity": 1.0}


def to_report_units(ell: EllipticalParams, delta: float) -> dict[str, float]:
    sc = report_scale(delta)
    return {k: getattr(ell, k) / sc[k] for k in ("alpha1", "beta1", "alpha2", "beta2", "sigma2")}


@dataclass(frozen=True)
class PolarFit:
    fit: FitResult
    spec: FitSpec
    sd: SpectralData
    psi_np: float | None = None
    eccentricity_np: float | None = None
    boot: BootstrapResult | None = None

    def summary(self) -> dict:
        delta = self.sd.grid.delta
        out = {
            "params": to_report_units(self.fit.ell, delta),
            "params_internal": self.fit.ell.to_dict(),
            "eccentricity": self.fit.eccentricity,
            "psi": self.fit.psi_hat,
            "converged": self.fit.converged,
            "n_freqs_used": self.fit.n_freqs_used,
            "boundary_flags": self.fit.boundary_flags,
        }
        if self.psi_np is not None:
            out["psi_nonparametric"] = self.psi_np
        if self.eccentricity_np is not None:
            out["eccentricity_nonparametric"] = self.eccentricity_np
        if self.boot is not None:
            out["ci_level"] = self.boot.ci_level
            sc = report_scale(delta)
            out["ci"] = {k: [lo / sc[k], hi / sc[k]] for k, (lo, hi) in self.boot.ci.items()}
            out["bootstrap_failed"] = self.boot.failed
            out["bootstrap_dropped"] = self.boot.n_failed
        return out


def _maybe_boot(sd, res, spec, n_boot, seed):
    if not n_boot or not res.converged:
        return None
    return bootstrap(sd, res, spec, BootstrapConfig(n_boot=n_boot, seed=seed), n_jobs=None)


def chandler_fit(
    series: ComplexSeries,
    band_cpy: tuple[float, float] = CHANDLER_BAND,
    n_boot: int = 0,
    seed: int = 0,
) -> PolarFit:
    """Circular (complex OU) fit over one band of negative frequencies."""
    sd = dft(series, mean_subtract=True)
    spec = FitSpec(model="circular", likelihood="marginal", bands=cpy_bands([band_cpy]))
    res = fit(sd, spec)
    return PolarFit(res, spec, sd, boot=_maybe_boot(sd, res, spec, n_boot, seed))


def chandler_elliptical_fit(
    series: ComplexSeries,
    band_cpy: tuple[float, float] = (0.70, 0.97),
    likelihood: str = "marginal",
) -> PolarFit:
    """Elliptical fit over the Chandler band at both signs of frequency (a diagnostic)."""
    lo, hi = sorted(abs(b) for b in band_cpy)
    sd = dft(series, mean_subtract=True)
    spec = FitSpec(model="elliptical", likelihood=likelihood, bands=cpy_bands([(-hi, -lo), (lo, hi)]))
    return PolarFit(fit(sd, spec), spec, sd)


def annual_fit(
    series: ComplexSeries,
    band_cpy: tuple[float, float] = ANNUAL_BAND,
    n_boot: int = 0,
    seed: int = 0,
) -> PolarFit:
    """Elliptical fit with beta fixed at one cycle per year.

    The sign of beta follows the larger periodogram peak in the band, so
    that the dominant rotation sits at +beta as the model requires.
    """
    lo, hi = sorted(abs(b) for b in band_cpy)
    sd = dft(series, mean_subtract=True)
    bands = cpy_bands([(-hi, -lo), (lo, hi)])
    w_peak = peak_frequency(sd, bands)
    beta = math.copysign(CPY, w_peak)
    spec = FitSpec(model="elliptical-fixed-beta", likelihood="marginal", bands=bands, beta=beta)
    res = fit(sd, spec)
    psi_np = estimate_orientation(sd, beta)
    ecc_np = estimate_eccentricity_np(sd, beta)
    return PolarFit(res, spec, sd, psi_np, ecc_np, _maybe_boot(sd, res, spec, n_boot, seed))
