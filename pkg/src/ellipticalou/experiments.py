"""Named parameter sets and study configurations used by the CLI, tests and notebooks."""

from __future__ import annotations

from .params import EllipticalParams
from .uncertainty import BootstrapConfig, McConfig
from .whittle import FitSpec

# Left and right panels of the standard illustration: a strongly elliptical
# slow-damping oscillation and a slower, rounder one.
FIG1_LEFT = EllipticalParams(0.02, 1.0, -0.5, -0.3, 2.0)
FIG1_RIGHT = EllipticalParams(0.002, 0.5, 0.3, 0.3, 0.15)

NARROWBAND = [(-0.897, -0.725), (0.725, 0.897)]

TABLE2_SPECS = {
    "full-all": FitSpec(likelihood="full"),
    "marginal-all": FitSpec(likelihood="marginal"),
    "full-narrow": FitSpec(likelihood="full", bands=NARROWBAND),
    "marginal-narrow": FitSpec(likelihood="marginal", bands=NARROWBAND),
}

SCALES = {
    # replicate counts per target: (full scale, desk scale)
    "table2": (1000, 200),
    "table3_series": (1000, 200),
    "table3_boot": (100, 100),
    "polar_boot": (10_000, 500),
}


def n_for(target: str, scale: str) -> int:
    full, desk = SCALES[target]
    return full if scale == "paper" else desk


def table2_config(n_reps: int, seed: int = 2024, specs: dict[str, FitSpec] | None = None) -> McConfig:
    return McConfig(
        n_reps=n_reps,
        true_params=FIG1_LEFT,
        n=1759,
        delta=1.0,
        fit_specs=TABLE2_SPECS if specs is None else specs,
        seed=seed,
    )


def table3_boot_configs(n_boot: int = 100, seed: int = 77) -> dict[str, BootstrapConfig]:
    return {
        "periodogram": BootstrapConfig(n_boot=n_boot, spectral_estimator="raw_periodogram", seed=seed),
        "epanechnikov": BootstrapConfig(n_boot=n_boot, spectral_estimator="epanechnikov", bandwidth=0.07, seed=seed),
    }
