"""
Whittle pseudo-likelihoods and fitting for the elliptical OU process.

Two objectives are available:

* the *full* likelihood matches the 2-vector (J_Z(w), J_{Z*}(w)) against the
  2x2 spectral matrix [[S(w), R(w)], [R*(w), S(-w)]];
* the *marginal* likelihood matches only the periodogram I(w) = |J_Z(w)|^2
  against S(w). The orientation psi does not enter it and is recovered
  afterwards from the phases of J_Z at the spectral peak.

Both can be restricted to bands of frequencies. The noise amplitude A^2
scales every spectrum, so it is profiled out in closed form and the
simplex search runs over the remaining (transformed) parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Literal

import numpy as np
from scipy.optimize import OptimizeResult, minimize

from .fourier import Bands, SpectralData, band_mask, peak_frequency
from .params import EllipticalParams, GeometricParams, to_elliptical, wrap_orientation
from .sampling import make_rng
from .spectral import DEFAULT_K, aliased_lorentzian, aliased_psd, aliased_comp_spectrum

__all__ = [
    "OptimizerConfig",
    "FitSpec",
    "FitResult",
    "loglik_full",
    "loglik_marginal",
    "fit",
    "fit_periodogram",
    "estimate_orientation",
    "estimate_eccentricity_np",
    "used_frequencies",
    "initial_guess",
]

Model = Literal["elliptical", "circular", "elliptical-fixed-beta"]
Likelihood = Literal["full", "marginal"]


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 4000
    tol_rel: float = 1e-10
    restarts: int = 3
    init: GeometricParams | str = "auto"
    seed: int = 0
    polish: bool = True
    xtol: float = 1e-9

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")


@dataclass(frozen=True)
class FitSpec:
    """What to fit and how.

    ``beta`` is the fixed oscillation frequency (radians per time unit) for
    ``model="elliptical-fixed-beta"`` and ignored otherwise. Bands are in
    radians per time unit.
    """

    model: Model = "elliptical"
    likelihood: Likelihood = "marginal"
    bands: Bands = "all"
    k_max: int | None = DEFAULT_K
    mean_subtract: bool = True
    beta: float | None = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.model not in ("elliptical", "circular", "elliptical-fixed-beta"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.likelihood not in ("full", "marginal"):
            raise ValueError(f"unknown likelihood {self.likelihood!r}")
        if self.model == "elliptical-fixed-beta" and self.beta is None:
            raise ValueError("fixed-beta model needs beta")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError("k_max must be non-negative")
        if not isinstance(self.bands, str) and len(self.bands) == 0:
            raise ValueError("bands must be non-empty")


@dataclass(frozen=True)
class FitResult:
    geo: GeometricParams
    ell: EllipticalParams
    psi_hat: float
    loglik: float
    converged: bool
    n_freqs_used: int
    boundary_flags: dict[str, bool]
    n_evals: int = 0
    message: str = ""

    @property
    def eccentricity(self) -> float:
        return self.geo.eccentricity

    def to_dict(self) -> dict[str, Any]:
        return {
            "geo": self.geo.to_dict(),
            "ell": self.ell.to_dict(),
            "psi_hat": self.psi_hat,
            "eccentricity": self.eccentricity,
            "loglik": self.loglik,
            "converged": self.converged,
            "n_freqs_used": self.n_freqs_used,
            "boundary_flags": dict(self.boundary_flags),
            "n_evals": self.n_evals,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FitResult":
        return cls(
            GeometricParams.from_dict(d["geo"]),
            EllipticalParams.from_dict(d["ell"]),
            float(d["psi_hat"]),
            float(d["loglik"]),
            bool(d["converged"]),
            int(d["n_freqs_used"]),
            {k: bool(v) for k, v in d["boundary_flags"].items()},
            int(d.get("n_evals", 0)),
            str(d.get("message", "")),
        )


def used_frequencies(sd: SpectralData, spec: FitSpec) -> np.ndarray:
    """Mask of grid frequencies entering the likelihood sums."""
    mask = band_mask(sd.omegas, spec.bands)
    if spec.mean_subtract or sd.mean_removed:
        mask &= sd.omegas != 0
    return mask


def _require(mask: np.ndarray) -> None:
    if not mask.any():
        raise ValueError("the requested bands contain no Fourier frequency")


def loglik_marginal(sd: SpectralData, g: GeometricParams, spec: FitSpec) -> float:
    """-sum over used w of [log S(w) + I(w)/S(w)] with the aliased spectrum."""
    mask = used_frequencies(sd, spec)
    _require(mask)
    s = aliased_psd(g, sd.omegas[mask], sd.grid.delta, spec.k_max)
    return float(-np.sum(np.log(s) + sd.periodogram[mask] / s))


def loglik_full(sd: SpectralData, g: GeometricParams, spec: FitSpec) -> float:
    """-1/2 sum over used w of [log det S_C + J_C^H S_C^{-1} J_C].

    Returns ``-inf`` where the spectral matrix is not positive definite.
    """
    if sd.j_z is None:
        raise ValueError("the full likelihood needs transform phases, not just a periodogram")
    mask = used_frequencies(sd, spec)
    _require(mask)
    om = sd.omegas[mask]
    delta = sd.grid.delta
    a = aliased_psd(g, om, delta, spec.k_max)
    b = aliased_psd(g, -om, delta, spec.k_max)
    c = aliased_comp_spectrum(g, om, delta, spec.k_max)
    j1, j2 = sd.j_z[mask], sd.j_zconj[mask]
    det = a * b - np.abs(c) ** 2
    if np.any(det <= 0):
        return -math.inf
    quad = (b * np.abs(j1) ** 2 + a * np.abs(j2) ** 2 - 2 * np.real(c * np.conj(j1) * j2)) / det
    return float(-0.5 * np.sum(np.log(det) + quad))


def estimate_orientation(sd: SpectralData, omega_max: float) -> float:
    """Orientation from the phases of J_Z at +/- the peak frequency.

    psi = (arg J_Z(w) + arg J_Z(-w)) / 2, wrapped into (-pi/2, pi/2].
    ``omega_max`` is snapped to the nearest grid frequency.
    """
    if sd.j_z is None:
        raise ValueError("orientation needs transform phases")
    ip = sd.grid.index_of(abs(omega_max))
    im = sd.grid.index_of(-abs(omega_max))
    jp, jm = sd.j_z[ip], sd.j_z[im]
    scale = np.max(np.abs(sd.j_z))
    if abs(jp) <= 1e-14 * scale or abs(jm) <= 1e-14 * scale:
        raise ValueError("transform vanishes at the peak; the phase is undefined")
    return wrap_orientation(0.5 * (np.angle(jp) + np.angle(jm)))


def estimate_eccentricity_np(sd: SpectralData, omega_max: float) -> float:
    """2 sqrt(|J(w) J(-w)|) / (|J(w)| + |J(-w)|) at the peak frequency."""
    if sd.j_z is None:
        raise ValueError("eccentricity needs transform magnitudes")
    a = abs(sd.j_z[sd.grid.index_of(abs(omega_max))])
    b = abs(sd.j_z[sd.grid.index_of(-abs(omega_max))])
    if a == 0 and b == 0:
        raise ValueError("transform vanishes at both peak frequencies")
    return float(2 * math.sqrt(a * b) / (a + b))


# --- optimization ---------------------------------------------------------


class _Objective:
    """Profiled negative log-likelihood over transformed coordinates.

    Coordinates, in order and only when free: log alpha, beta, u (with
    rho = exp(-u^2), so rho = 1 sits at u = 0), and for the full
    likelihood psi measured from ``psi_ref``.

    Ordinates are divided by their mean over the used frequencies. With
    psi offset from a reference that itself rotates with the data, the
    objective is then numerically the same function for a rescaled or
    rotated series, and so is the simplex path.
    """

    def __init__(self, sd: SpectralData, spec: FitSpec, psi_fixed: float = 0.0, psi_ref: float = 0.0):
        self.spec = spec
        mask = used_frequencies(sd, spec)
        _require(mask)
        self.mask = mask
        self.om = sd.omegas[mask]
        self.delta = sd.grid.delta
        self.k_max = spec.k_max
        self.m = int(mask.sum())
        self.full = spec.likelihood == "full"
        if self.full:
            if sd.j_z is None:
                raise ValueError("the full likelihood needs transform phases")
            p1 = np.abs(sd.j_z[mask]) ** 2
            p2 = np.abs(sd.j_zconj[mask]) ** 2
            self.scale = _positive_mean(p1 + p2) / 2
            self.p1, self.p2 = p1 / self.scale, p2 / self.scale
            self.cross = np.conj(sd.j_z[mask]) * sd.j_zconj[mask] / self.scale
        else:
            ip = np.asarray(sd.periodogram, dtype=float)[mask]
            self.scale = _positive_mean(ip)
            self.ip = ip / self.scale
        self.free_beta = spec.model != "elliptical-fixed-beta"
        self.free_rho = spec.model != "circular"
        self.free_psi = self.full and self.free_rho
        self.psi_fixed = psi_fixed
        self.psi_ref = psi_ref
        self.n_evals = 0

    # coordinate maps
    def unpack(self, u: np.ndarray) -> tuple[float, float, float, float]:
        i = 0
        alpha = math.exp(u[i])
        i += 1
        if self.free_beta:
            beta = float(u[i])
            i += 1
        else:
            beta = float(self.spec.beta)
        if self.free_rho:
            rho = math.exp(-u[i] * u[i])
            i += 1
        else:
            rho = 1.0
        psi = self.psi_ref + float(u[i]) if self.free_psi else self.psi_fixed
        return alpha, beta, rho, psi

    def pack(self, g: GeometricParams) -> np.ndarray:
        u = [math.log(g.alpha)]
        if self.free_beta:
            u.append(g.beta)
        if self.free_rho:
            u.append(math.sqrt(max(-math.log(min(g.rho, 1.0)), 0.0)))
        if self.free_psi:
            d = g.psi - self.psi_ref
            u.append((d + math.pi / 2) % math.pi - math.pi / 2)
        return np.array(u, dtype=float)

    def _parts(self, alpha, beta, rho):
        both = aliased_lorentzian(alpha, np.concatenate([self.om - beta, self.om + beta]), self.delta, self.k_max)
        lm, lp = both[: self.m], both[self.m :]
        w1 = (1 / rho + rho) ** 2 / 4
        w2 = (1 / rho - rho) ** 2 / 4
        return lm, lp, w1, w2

    def profile(self, u: np.ndarray) -> tuple[float, float]:
        """(negative profiled log-likelihood, profiled A^2)."""
        self.n_evals += 1
        alpha, beta, rho, psi = self.unpack(u)
        if not (math.isfinite(alpha) and alpha > 0 and math.isfinite(beta) and rho > 0):
            return math.inf, math.nan
        with np.errstate(all="ignore"):
            lm, lp, w1, w2 = self._parts(alpha, beta, rho)
            if self.full:
                gp = w1 * lm + w2 * lp
                gn = w1 * lp + w2 * lm
                amp = (1 / rho**2 - rho**2) / 4
                rc = amp * (lm + lp) * np.exp(2j * psi)
                det = gp * gn - np.abs(rc) ** 2
                if not np.all(det > 0):
                    return math.inf, math.nan
                q = (gn * self.p1 + gp * self.p2 - 2 * np.real(rc * self.cross)) / det
                a2 = float(np.sum(q)) / (2 * self.m)
                if not a2 > 0:
                    return math.inf, math.nan
                val = 0.5 * (2 * self.m * math.log(a2) + float(np.sum(np.log(det))) + 2 * self.m)
            else:
                gp = w1 * lm + w2 * lp
                if not np.all(gp > 0):
                    return math.inf, math.nan
                a2 = float(np.mean(self.ip / gp))
                if not a2 > 0:
                    return math.inf, math.nan
                val = self.m * (math.log(a2) + 1) + float(np.sum(np.log(gp)))
        if not math.isfinite(val):
            return math.inf, math.nan
        return val, a2 * self.scale

    def __call__(self, u: np.ndarray) -> float:
        return self.profile(u)[0]


def _positive_mean(x: np.ndarray) -> float:
    m = float(np.mean(x))
    return m if m > 0 and math.isfinite(m) else 1.0


def _smoothed(values: np.ndarray, half: int = 2) -> np.ndarray:
    k = np.ones(2 * half + 1) / (2 * half + 1)
    return np.convolve(np.pad(values, half, mode="wrap"), k, mode="valid")


def initial_guess(sd: SpectralData, spec: FitSpec) -> GeometricParams:
    """Moment-style starting point read off the periodogram.

    beta at the band's periodogram peak; rho from the ratio of the
    (lightly smoothed) ordinates at -beta and +beta; alpha from the
    half-width at half-maximum around the peak, at least one grid spacing.
    A^2 is matched to the peak height.
    """
    om = sd.omegas
    spacing = sd.grid.spacing
    mask = used_frequencies(sd, spec)
    _require(mask)
    per = np.asarray(sd.periodogram, dtype=float)
    smooth = _smoothed(per)
    if spec.model == "elliptical-fixed-beta":
        beta = float(spec.beta)
    else:
        beta = peak_frequency(sd.with_periodogram(np.where(mask, smooth, -np.inf)), "all")
    ip = sd.grid.index_of(beta)
    im = sd.grid.index_of(-beta)
    peak = max(smooth[ip], 1e-300)
    if spec.model == "circular":
        rho = 1.0
    else:
        ratio = min(smooth[im] / peak, 1.0)
        q = min(math.sqrt(max(ratio, 0.0)), 0.9)
        rho = math.sqrt((1 - q) / (1 + q))
        rho = min(max(rho, 0.05), 0.999)
    # half width at half maximum
    n = om.size
    width = spacing
    for step in range(1, n // 2):
        lo, hi = smooth[(ip - step) % n], smooth[(ip + step) % n]
        if min(lo, hi) < peak / 2:
            width = step * spacing
            break
    alpha = max(width, spacing)
    a2 = 4 * alpha**2 * peak / (1 / rho + rho) ** 2
    return GeometricParams(alpha, beta, rho, 0.0, max(a2, 1e-300))


def _boundary_flags(alpha: float, rho: float, sd: SpectralData) -> dict[str, bool]:
    return {
        "alpha_low": alpha < 1e-4 * sd.grid.spacing,
        "alpha_high": alpha > 10 * sd.grid.nyquist,
        "rho_circle": rho > 1 - 1e-6,
        "rho_line": rho < 1e-3,
    }


def _run_simplex(obj: _Objective, start: np.ndarray, cfg: OptimizerConfig):
    f0 = obj(start)
    if not math.isfinite(f0):
        # nothing to descend from; a simplex of infinities never terminates early
        return OptimizeResult(x=start, fun=math.inf, success=False, message="objective not finite at start", nfev=1)
    fatol = cfg.tol_rel * max(1.0, abs(f0))
    res = minimize(
        obj,
        start,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iters,
            "maxfev": 4 * cfg.max_iters,
            "xatol": cfg.xtol,
            "fatol": fatol,
            "adaptive": start.size > 2,
        },
    )
    return res


def _optimize(obj: _Objective, init: GeometricParams, cfg: OptimizerConfig, spacing: float):
    rng = make_rng(cfg.seed, 7919)
    u0 = obj.pack(init)
    starts = [u0]
    for _ in range(cfg.restarts):
        du = np.zeros_like(u0)
        du[0] = rng.normal(0, 0.5)
        j = 1
        if obj.free_beta:
            du[j] = rng.normal(0, 2 * spacing)
            j += 1
        if obj.free_rho:
            du[j] = rng.normal(0, 0.3)
            j += 1
        if obj.free_psi:
            du[j] = rng.uniform(-np.pi / 2, np.pi / 2)
        starts.append(u0 + du)
    best = None
    for s in starts:
        res = _run_simplex(obj, s, cfg)
        if best is None or res.fun < best.fun:
            best = res
    # polish from the best vertex; Nelder-Mead can stall on a degenerate simplex
    if cfg.polish:
        polished = _run_simplex(obj, best.x, cfg)
        if polished.fun <= best.fun:
            best = polished
    return best


def fit(sd: SpectralData, spec: FitSpec) -> FitResult:
    """Maximize the chosen Whittle likelihood.

    For the marginal likelihood of an elliptical model the orientation is
    then read from the transform phases at the periodogram peak inside
    the fitted bands. A result with
    ``converged=False`` is returned rather than raised when the simplex
    search does not settle or damping runs to a bound.
    """
    psi_fixed = 0.0
    if spec.model != "circular" and spec.likelihood == "marginal" and sd.j_z is None:
        init = spec.optimizer.init
        psi_fixed = init.psi if isinstance(init, GeometricParams) else 0.0
    return _fit(sd, spec, psi_fixed)


def fit_periodogram(sd: SpectralData, spec: FitSpec, psi: float) -> FitResult:
    """Marginal fit to a (possibly resampled) periodogram with psi held at ``psi``."""
    if spec.likelihood != "marginal":
        spec = replace(spec, likelihood="marginal")
    return _fit(sd.with_periodogram(sd.periodogram), spec, psi)


def _fit(sd: SpectralData, spec: FitSpec, psi_fixed: float) -> FitResult:
    obj = _Objective(sd, spec, psi_fixed)
    cfg = spec.optimizer
    if isinstance(cfg.init, GeometricParams):
        init = cfg.init
        if spec.model == "circular":
            init = replace(init, rho=1.0, psi=0.0)
        if spec.model == "elliptical-fixed-beta":
            init = replace(init, beta=float(spec.beta))
    elif cfg.init == "auto":
        init = initial_guess(sd, spec)
        if obj.free_psi and sd.j_z is not None:
            try:
                init = replace(init, psi=estimate_orientation(sd, peak_frequency(sd, spec.bands)))
            except ValueError:
                pass
    else:
        raise ValueError(f"unknown init {cfg.init!r}")

    if obj.free_psi:
        obj.psi_ref = wrap_orientation(init.psi)
    res = _optimize(obj, init, cfg, sd.grid.spacing)
    negll, a2 = obj.profile(res.x)
    # undo the ordinate normalisation in the reported likelihood
    negll += obj.m * math.log(obj.scale)
    alpha, beta, rho, psi = obj.unpack(res.x)
    flags = _boundary_flags(alpha, rho, sd)
    # the profiled amplitude is a parameter too
    flags["too_few_frequencies"] = obj.m <= res.x.size + 1
    ok = bool(res.success) and math.isfinite(negll)
    ok = ok and not (flags["alpha_low"] or flags["alpha_high"] or flags["too_few_frequencies"])

    if spec.model == "circular":
        psi_hat = 0.0
    elif obj.free_psi:
        psi_hat = wrap_orientation(psi)
    elif sd.j_z is not None:
        # the largest ordinate carries the cleanest phase; the fitted beta
        # rarely sits on the best-resolved bin
        psi_hat = estimate_orientation(sd, peak_frequency(sd, spec.bands))
    else:
        psi_hat = wrap_orientation(psi_fixed)
    if rho == 1.0:
        psi_hat = 0.0 if spec.model == "circular" else psi_hat

    if not math.isfinite(negll) or not a2 > 0:
        a2 = max(init.a2, 1e-300)
        ok = False
    geo = GeometricParams(alpha, beta, min(rho, 1.0), psi_hat, a2)
    try:
        ell = to_elliptical(geo)
    except Exception:
        ell = EllipticalParams(alpha, beta, 0.0, 0.0, a2)
        ok = False
    return FitResult(
        geo=geo,
        ell=ell,
        psi_hat=psi_hat,
        loglik=-negll,
        converged=ok,
        n_freqs_used=obj.m,
        boundary_flags=flags,
        n_evals=obj.n_evals,
        message=str(res.message),
    )
