"""
Euler-Maruyama simulation of the elliptical OU process.

Paths are produced on a fine internal grid ``dt = delta_out / substeps`` and
recorded every ``substeps`` steps. Two generators of the same Markov chain
are available:

``"stepwise"``
    draws one bivariate normal per internal step and runs the recursion
    ``v <- M v + sqrt(dt) F xi`` literally.
``"aggregated"``
    draws one bivariate normal per *output* sample from the exact law of
    ``substeps`` consecutive Euler steps (the chain is linear and Gaussian),
    so large ``substeps`` cost nothing extra.

Both yield the Euler chain observed at the output times, so they agree in
distribution though not path by path.

Random streams come from a counter-based Philox generator keyed by
``(seed, replicate)``; each replicate's stream is independent of how many
others are run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from scipy.signal import lfilter

from .params import EllipticalParams, GeometricParams, ParameterError

__all__ = [
    "ComplexSeries",
    "SimConfig",
    "make_rng",
    "increment_factor",
    "sample_increment",
    "simulate",
    "simulate_bivariate",
    "simulate_linear",
    "euler_transition",
]

STATIONARY = "stationary"

# Bound on normals drawn per block in stepwise mode (pairs).
_BLOCK = 1 << 18


@dataclass(frozen=True)
class ComplexSeries:
    """Regularly sampled complex trajectory z = x + iy."""

    values: np.ndarray
    delta: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("a series needs at least one sample")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive (got {self.delta!r})")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.delta * np.arange(self.n)

    @property
    def x(self) -> np.ndarray:
        return self.values.real

    @property
    def y(self) -> np.ndarray:
        return self.values.imag


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``burn_in=None`` means 50 damping times (50/alpha1) for ``simulate``
    and no burn-in for ``simulate_linear``. ``z0`` is a complex start or
    ``"stationary"`` for a draw from the stationary law of the Euler chain.
    """

    n_out: int
    delta_out: float = 1.0
    substeps: int = 100
    burn_in: float | None = None
    seed: int = 0
    z0: Union[complex, str] = 0j
    replicate: int = 0
    method: Literal["stepwise", "aggregated"] = "stepwise"

    def __post_init__(self):
        if self.n_out < 1:
            raise ValueError("n_out must be at least 1")
        if not self.delta_out > 0:
            raise ValueError("delta_out must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be at least 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.method not in ("stepwise", "aggregated"):
            raise ValueError(f"unknown method {self.method!r}")
        if isinstance(self.z0, str) and self.z0 != STATIONARY:
            raise ValueError(f"z0 must be complex or {STATIONARY!r}")

    @property
    def dt(self) -> float:
        return self.delta_out / self.substeps


def make_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, replicate) stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replicate)])))


def increment_factor(sigma2: float, r: complex) -> np.ndarray:
    """Lower-triangular F with F F^T the covariance of (Re B, Im B).

    Var(Re B) = (sigma2 + Re r)/2, Var(Im B) = (sigma2 - Re r)/2,
    Cov = Im(r)/2. Degenerate (|r| = sigma2) laws are allowed.
    """
    r = complex(r)
    if sigma2 < 0 or abs(r) > sigma2 * (1 + 1e-12):
        raise ParameterError(f"no complex normal has sigma2={sigma2!r} and |r|={abs(r)!r}")
    c11 = max((sigma2 + r.real) / 2, 0.0)
    c22 = max((sigma2 - r.real) / 2, 0.0)
    c12 = r.imag / 2
    l11 = math.sqrt(c11)
    l21 = c12 / l11 if l11 > 0 else 0.0
    l22 = math.sqrt(max(c22 - l21 * l21, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def sample_increment(sigma2: float, r: complex, dt: float, rng: np.random.Generator, size=None):
    """Draw sqrt(dt) B with B ~ CN(0, sigma2, r)."""
    f = increment_factor(sigma2, r)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    xi = rng.standard_normal(shape + (2,))
    v = math.sqrt(dt) * xi @ f.T
    out = v[..., 0] + 1j * v[..., 1]
    return complex(out) if size is None else out


def euler_transition(drift: np.ndarray, cov: np.ndarray, dt: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean map and noise covariance of ``steps`` Euler steps.

    For M = I + dt*drift and per-step noise covariance dt*cov returns
    (M^steps, sum_{j<steps} M^j (dt cov) M^j^T), by binary powering.
    """
    m = np.eye(2) + dt * np.asarray(drift, dtype=float)
    c = dt * np.asarray(cov, dtype=float)
    p_acc, s_acc = np.eye(2), np.zeros((2, 2))
    p_pow, s_pow = m, c
    k = int(steps)
    while k:
        if k & 1:
            # append a block of length 2^j after the accumulated one
            s_acc = s_pow + p_pow @ s_acc @ p_pow.T
            p_acc = p_pow @ p_acc
        k >>= 1
        if k:
            s_pow = s_pow + p_pow @ s_pow @ p_pow.T
            p_pow = p_pow @ p_pow
    return p_acc, 0.5 * (s_acc + s_acc.T)


def _psd_sqrt(c: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (c + c.T))
    return v * np.sqrt(np.clip(w, 0.0, None))


def _stationary_cov(m: np.ndarray, c: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_discrete_lyapunov

    if np.max(np.abs(np.linalg.eigvals(m))) >= 1:
        raise ParameterError("Euler chain is not stable at this step size; no stationary law")
    x = solve_discrete_lyapunov(m, c)
    return 0.5 * (x + x.T)


def _linear_recursion(m: np.ndarray, noise: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """States v_1..v_N of v_{k+1} = m v_k + noise_k, from v_0 (rows are steps).

    Diagonalizes m; for complex-conjugate eigenvalues a single complex
    first-order filter carries the whole 2-D recursion.
    """
    evals, evecs = np.linalg.eig(m)
    if np.iscomplexobj(evals) and abs(evals[0].imag) > 0:
        mu = evals[0]
        winv = np.linalg.inv(evecs)[0]
        g = noise @ winv
        u0 = v0 @ winv
        u, _ = lfilter([1.0], [1.0, -mu], g, zi=np.array([mu * u0]))
        return 2.0 * np.real(u[:, None] * evecs[:, 0][None, :])
    out = np.empty_like(noise)
    v = v0.astype(float)
    for k in range(noise.shape[0]):
        v = m @ v + noise[k]
        out[k] = v
    return out


def _start_state(m, cov_step, z0, rng):
    # a draw from the chain's own stationary law, or the given point
    if isinstance(z0, str):
        x = _stationary_cov(m, cov_step)
        v = _psd_sqrt(x) @ rng.standard_normal(2)
    else:
        v = np.array([complex(z0).real, complex(z0).imag])
    return v


def simulate_linear(drift: np.ndarray, noise_factor: np.ndarray, cfg: SimConfig) -> ComplexSeries:
    """Euler-Maruyama for the 2-D linear SDE dv = drift v dt + noise_factor dW.

    Returns the path as a complex series x + iy with ``t0 = burn_in``.
    ``burn_in=None`` is read as zero here.
    """
    drift = np.asarray(drift, dtype=float)
    fac = np.asarray(noise_factor, dtype=float)
    cov = fac @ fac.T
    dt = cfg.dt
    m = np.eye(2) + dt * drift
    burn = 0.0 if cfg.burn_in is None else cfg.burn_in
    burn_steps = int(round(burn / dt))
    rng = make_rng(cfg.seed, cfg.replicate)
    v = _start_state(m, dt * cov, cfg.z0, rng)

    if cfg.method == "aggregated":
        if burn_steps:
            pb, sb = euler_transition(drift, cov, dt, burn_steps)
            v = pb @ v + _psd_sqrt(sb) @ rng.standard_normal(2)
        pm, sm = euler_transition(drift, cov, dt, cfg.substeps)
        noise = rng.standard_normal((cfg.n_out - 1, 2)) @ _psd_sqrt(sm).T
        path = np.vstack([v, _linear_recursion(pm, noise, v)]) if cfg.n_out > 1 else v[None, :]
    else:
        scale = math.sqrt(dt) * fac.T
        remaining = burn_steps
        while remaining:
            k = min(remaining, _BLOCK)
            states = _linear_recursion(m, rng.standard_normal((k, 2)) @ scale, v)
            v = states[-1]
            remaining -= k
        out = np.empty((cfg.n_out, 2))
        out[0] = v
        filled = 1
        per_block = max(1, _BLOCK // cfg.substeps)
        while filled < cfg.n_out:
            n_rec = min(per_block, cfg.n_out - filled)
            steps = n_rec * cfg.substeps
            states = _linear_recursion(m, rng.standard_normal((steps, 2)) @ scale, v)
            out[filled : filled + n_rec] = states[cfg.substeps - 1 :: cfg.substeps]
            v = states[-1]
            filled += n_rec
        path = out
    return ComplexSeries(path[:, 0] + 1j * path[:, 1], cfg.delta_out, burn_steps * dt)


def simulate(p: EllipticalParams, cfg: SimConfig) -> ComplexSeries:
    """Simulate the elliptical OU SDE by Euler-Maruyama.

    Each internal step applies
    ``z <- z + dt[(-alpha1 + i beta1) z + (-alpha2 + i beta2) z*] + sqrt(dt) B``
    with ``B ~ CN(0, sigma2, r)``. Deterministic given ``cfg``.
    """
    p.validate()
    if cfg.burn_in is None:
        cfg = _with_burn(cfg, 50.0 / p.alpha1)
    return simulate_linear(p.drift_matrix(), increment_factor(p.sigma2, p.r), cfg)


def simulate_bivariate(g: GeometricParams, cfg: SimConfig) -> ComplexSeries:
    """Simulate the circular bivariate OU and deform each sample by QP.

    Same law as ``simulate(to_elliptical(g), cfg)``.
    """
    g.validate()
    if cfg.burn_in is None:
        cfg = _with_burn(cfg, 50.0 / g.alpha)
    omega = np.array([[-g.alpha, -g.beta], [g.beta, -g.alpha]])
    qp = g.deformation()
    if not isinstance(cfg.z0, str) and cfg.z0 != 0:
        start = np.linalg.solve(qp, [complex(cfg.z0).real, complex(cfg.z0).imag])
        cfg = _replace(cfg, z0=complex(start[0], start[1]))
    circ = simulate_linear(omega, math.sqrt(g.a2 / 2) * np.eye(2), cfg)
    xy = np.column_stack([circ.x, circ.y]) @ qp.T
    return ComplexSeries(xy[:, 0] + 1j * xy[:, 1], circ.delta, circ.t0)


def _replace(cfg: SimConfig, **kw) -> SimConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


def _with_burn(cfg: SimConfig, burn: float) -> SimConfig:
    return _replace(cfg, burn_in=burn)
