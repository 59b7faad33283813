"""Elliptical Ornstein-Uhlenbeck processes: parameter maps, spectra, simulation and Whittle fitting."""

__version__ = "0.1.0"

from .params import (
    ComplexAR1Params,
    EllipticalParams,
    GeometricParams,
    ParameterError,
    eccentricity,
    proper_ar1_map,
    to_elliptical,
    to_geometric,
)
from .sampling import ComplexSeries, SimConfig, simulate, simulate_bivariate
from .spectral import aliased_psd, autocovariance, comp_spectrum, psd
from .fourier import SpectralData, dft
from .whittle import FitResult, FitSpec, OptimizerConfig, fit

__all__ = [
    "ComplexAR1Params",
    "EllipticalParams",
    "GeometricParams",
    "ParameterError",
    "eccentricity",
    "proper_ar1_map",
    "to_elliptical",
    "to_geometric",
    "ComplexSeries",
    "SimConfig",
    "simulate",
    "simulate_bivariate",
    "aliased_psd",
    "autocovariance",
    "comp_spectrum",
    "psd",
    "SpectralData",
    "dft",
    "FitResult",
    "FitSpec",
    "OptimizerConfig",
    "fit",
]
