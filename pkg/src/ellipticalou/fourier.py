"""
Discrete Fourier transforms, periodograms and band utilities.

The transform of a series Z_1..Z_n sampled every ``delta`` is

    J_Z(w) = sqrt(delta / n) * sum_{t=1}^{n} Z_t exp(-i w t delta)

on the Fourier grid 2 pi k/(n delta), k = -ceil(n/2)+1 .. floor(n/2), so
``E|J_Z(w)|^2`` approximates the (aliased) spectral density. ``J_{Z*}`` is
the same transform of the conjugated series.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence, Union

import numpy as np
from scipy.ndimage import convolve1d

from .sampling import ComplexSeries
from .spectral import FrequencyGrid, fourier_grid

__all__ = [
    "SpectralData",
    "Band",
    "Bands",
    "dft",
    "idft",
    "band_mask",
    "peak_frequency",
    "boxcar_bandpass",
    "smooth_periodogram",
    "epanechnikov_weights",
]

Band = tuple[float, float]
Bands = Union[str, Sequence[Band]]

# Relative slack on band edges so that edges computed in floating point
# (e.g. 2 pi k / (n delta)) are not lost.
_EDGE_RTOL = 1e-9


@dataclass(frozen=True)
class SpectralData:
    """Transform of one series on its Fourier grid.

    ``j_z`` and ``j_zconj`` may be ``None`` for periodogram-only data
    (bootstrap replicates carry no phase).
    """

    grid: FrequencyGrid
    j_z: np.ndarray | None
    j_zconj: np.ndarray | None
    periodogram: np.ndarray
    mean_removed: bool = False

    @property
    def omegas(self) -> np.ndarray:
        return self.grid.omegas

    def with_periodogram(self, values: np.ndarray) -> "SpectralData":
        """Phase-free copy carrying a replacement periodogram."""
        return replace(self, j_z=None, j_zconj=None, periodogram=np.asarray(values, dtype=float))


def _fft_on_grid(values: np.ndarray, grid: FrequencyGrid, phase_origin: str) -> np.ndarray:
    n = values.size
    k = np.rint(grid.omegas * n * grid.delta / (2 * np.pi)).astype(int)
    raw = np.fft.fft(values)[k % n]
    if phase_origin == "one":
        # time index t = 1..n rather than 0..n-1
        raw = raw * np.exp(-1j * grid.omegas * grid.delta)
    return np.sqrt(grid.delta / n) * raw


def dft(
    series: ComplexSeries,
    mean_subtract: bool = False,
    phase_origin: Literal["one", "zero"] = "one",
) -> SpectralData:
    """Scaled DFT of the series and of its conjugate on the Fourier grid.

    Parameters
    ----------
    series : ComplexSeries
    mean_subtract : bool
        Remove the sample mean first (zeroes the w = 0 ordinate).
    phase_origin : {"one", "zero"}
        Whether the time index in the phase runs 1..n or 0..n-1. Only the
        phases of ``j_z``/``j_zconj`` depend on it.
    """
    if phase_origin not in ("one", "zero"):
        raise ValueError(f"unknown phase_origin {phase_origin!r}")
    values = np.asarray(series.values, dtype=complex)
    if values.size < 2:
        raise ValueError("need at least two samples to transform")
    if mean_subtract:
        values = values - values.mean()
    grid = fourier_grid(values.size, series.delta)
    j_z = _fft_on_grid(values, grid, phase_origin)
    j_zconj = _fft_on_grid(np.conj(values), grid, phase_origin)
    return SpectralData(grid, j_z, j_zconj, np.abs(j_z) ** 2, mean_subtract)


def idft(sd: SpectralData, t0: float = 0.0, phase_origin: Literal["one", "zero"] = "one") -> ComplexSeries:
    """Invert ``dft``: recover the series from ``j_z``."""
    if sd.j_z is None:
        raise ValueError("periodogram-only data cannot be inverted")
    grid = sd.grid
    n = grid.n
    coef = sd.j_z / np.sqrt(grid.delta / n)
    if phase_origin == "one":
        coef = coef * np.exp(1j * grid.omegas * grid.delta)
    k = np.rint(grid.omegas * n * grid.delta / (2 * np.pi)).astype(int)
    full = np.zeros(n, dtype=complex)
    full[k % n] = coef
    return ComplexSeries(np.fft.ifft(full), grid.delta, t0)


def band_mask(omegas: np.ndarray, bands: Bands) -> np.ndarray:
    """Boolean mask of frequencies inside the union of closed intervals.

    ``bands="all"`` selects everything; each band is ``(low, high)`` in the
    same units as ``omegas``.
    """
    omegas = np.asarray(omegas, dtype=float)
    if isinstance(bands, str):
        if bands != "all":
            raise ValueError(f"unknown band keyword {bands!r}")
        return np.ones(omegas.shape, dtype=bool)
    mask = np.zeros(omegas.shape, dtype=bool)
    scale = np.max(np.abs(omegas)) if omegas.size else 1.0
    tol = _EDGE_RTOL * max(scale, 1e-300)
    for lo, hi in bands:
        lo, hi = min(lo, hi), max(lo, hi)
        mask |= (omegas >= lo - tol) & (omegas <= hi + tol)
    return mask


def peak_frequency(sd: SpectralData, band: Band | Bands) -> float:
    """Grid frequency in ``band`` with the largest periodogram ordinate.

    Ties go to the smaller |w|, then to the negative frequency.
    """
    bands = [band] if (isinstance(band, tuple) and np.isscalar(band[0])) else band
    mask = band_mask(sd.omegas, bands)
    if not mask.any():
        raise ValueError("band contains no grid frequency")
    idx = np.flatnonzero(mask)
    vals = sd.periodogram[idx]
    best = idx[vals == vals.max()]
    om = sd.omegas[best]
    order = np.lexsort((om, np.abs(om)))
    return float(om[order[0]])


def boxcar_bandpass(series: ComplexSeries, bands: Bands) -> ComplexSeries:
    """Zero every Fourier coefficient outside ``bands`` and transform back."""
    sd = dft(series)
    keep = band_mask(sd.omegas, bands)
    masked = replace(sd, j_z=np.where(keep, sd.j_z, 0))
    out = idft(masked, series.t0)
    return out


def epanechnikov_weights(spacing: float, bandwidth: float) -> np.ndarray:
    """Kernel weights 0.75 (1 - u^2) at offsets u = j spacing / bandwidth, |u| <= 1."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    half = int(np.floor(bandwidth / spacing))
    u = np.arange(-half, half + 1) * spacing / bandwidth
    w = 0.75 * (1 - u * u)
    return np.clip(w, 0.0, None)


def smooth_periodogram(sd: SpectralData, bandwidth: float) -> np.ndarray:
    """Epanechnikov-smoothed periodogram, wrapping circularly across +/- Nyquist.

    At each frequency returns sum K(u) I(w') / sum K(u) with
    u = (w - w') / bandwidth.
    """
    w = epanechnikov_weights(sd.grid.spacing, bandwidth)
    if w.sum() <= 0 or w.size == 1:
        return np.array(sd.periodogram, dtype=float)
    w = w / w.sum()
    return convolve1d(np.asarray(sd.periodogram, dtype=float), w, mode="wrap")
