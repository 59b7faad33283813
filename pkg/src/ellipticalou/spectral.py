"""
Closed-form spectra and covariances of the elliptical OU process.

Conventions: ``S(w) = int s(tau) exp(-i w tau) dtau`` with
``s(tau) = E[z(t + tau) z*(t)]`` so that a counter-clockwise rotation
(beta > 0) puts the dominant peak at positive frequency, matching the
periodogram ``|sum Z_t exp(-i w t)|^2``. The complementary spectrum ``R`` is
the transform of ``r(tau) = E[z(t + tau) z(t)]``.

All functions broadcast over ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import GeometricParams

__all__ = [
    "FrequencyGrid",
    "SpectralValue",
    "fourier_grid",
    "lorentzian",
    "aliased_lorentzian",
    "psd_complex_ou",
    "psd",
    "comp_spectrum",
    "aliased_psd",
    "aliased_comp_spectrum",
    "spectral_matrix",
    "autocovariance",
    "comp_autocovariance",
    "appendix_b_oracle",
    "RealizabilityError",
    "DEFAULT_K",
]

DEFAULT_K = 10


class RealizabilityError(RuntimeError):
    """The 2x2 spectral matrix came out indefinite (an implementation fault)."""


@dataclass(frozen=True)
class FrequencyGrid:
    omegas: np.ndarray
    delta: float
    n: int

    @property
    def spacing(self) -> float:
        return 2 * np.pi / (self.n * self.delta)

    @property
    def nyquist(self) -> float:
        return np.pi / self.delta

    def index_of(self, omega: float) -> int:
        """Index of the grid frequency nearest to ``omega``."""
        return int(np.argmin(np.abs(self.omegas - omega)))


def fourier_grid(n: int, delta: float = 1.0) -> FrequencyGrid:
    """Fourier frequencies 2 pi k / (n delta) for k = -ceil(n/2)+1 .. floor(n/2)."""
    if n < 1:
        raise ValueError("n must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")
    k = np.arange(-((n + 1) // 2) + 1, n // 2 + 1)
    return FrequencyGrid(2 * np.pi * k / (n * delta), float(delta), int(n))


@dataclass(frozen=True)
class SpectralValue:
    """Entries of the 2x2 spectral matrix [[S(w), R(w)], [R*(w), S(-w)]]."""

    s_pos: np.ndarray
    s_neg: np.ndarray
    r_val: np.ndarray

    @property
    def determinant(self) -> np.ndarray:
        return self.s_pos * self.s_neg - np.abs(self.r_val) ** 2


def lorentzian(alpha: float, x):
    """1 / (alpha^2 + x^2)."""
    x = np.asarray(x, dtype=float)
    return 1.0 / (alpha * alpha + x * x)


def aliased_lorentzian(alpha: float, x, delta: float, k_max: int | None = DEFAULT_K):
    """Sum of ``lorentzian(alpha, x + 2 pi k / delta)`` over |k| <= k_max.

    ``k_max=None`` gives the untruncated sum in closed form.
    """
    x = np.asarray(x, dtype=float)
    period = 2 * np.pi / delta
    if k_max is None:
        # sum_k 1/(a^2 + (x + kT)^2) = (pi/(aT)) sinh(2 pi a/T) / (cosh(2 pi a/T) - cos(2 pi x/T))
        u = 2 * np.pi * alpha / period
        # sinh(u)/(cosh(u) - cos v) rewritten to stay finite for large u
        v = 2 * np.pi * x / period
        em = np.exp(-u)
        ratio = (1 - em * em) / (1 + em * em - 2 * em * np.cos(v))
        return np.pi / (alpha * period) * ratio
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if k_max == 0:
        return lorentzian(alpha, x)
    shifts = period * np.arange(-k_max, k_max + 1)
    # shifts on the leading axis so the reduction runs over contiguous rows
    xs = np.add.outer(shifts, x)
    xs *= xs
    xs += alpha * alpha
    np.reciprocal(xs, out=xs)
    return xs.sum(axis=0)


def psd_complex_ou(g: GeometricParams, omega):
    """Power spectrum A^2 / (alpha^2 + (omega - beta)^2) of the circular process."""
    return g.a2 * lorentzian(g.alpha, np.asarray(omega, dtype=float) - g.beta)


def _weights(g: GeometricParams) -> tuple[float, float]:
    inv = 1.0 / g.rho
    return (inv + g.rho) ** 2 / 4.0, (inv - g.rho) ** 2 / 4.0


def psd(g: GeometricParams, omega):
    """Power spectrum of the elliptical OU process.

    (A^2/4) [ (1/rho + rho)^2 L(omega - beta) + (1/rho - rho)^2 L(omega + beta) ]
    with L(x) = 1/(alpha^2 + x^2).
    """
    omega = np.asarray(omega, dtype=float)
    w_main, w_mirror = _weights(g)
    return g.a2 * (w_main * lorentzian(g.alpha, omega - g.beta) + w_mirror * lorentzian(g.alpha, omega + g.beta))


def comp_spectrum(g: GeometricParams, omega):
    """Complementary spectrum; its argument is 2 psi at every frequency."""
    omega = np.asarray(omega, dtype=float)
    amp = g.a2 / 4.0 * (1.0 / g.rho**2 - g.rho**2)
    body = lorentzian(g.alpha, omega - g.beta) + lorentzian(g.alpha, omega + g.beta)
    return amp * body * np.exp(2j * g.psi)


def aliased_psd(g: GeometricParams, omega, delta: float, k_max: int | None = DEFAULT_K):
    """Power spectrum of the sampled process, folded over |k| <= k_max."""
    omega = np.asarray(omega, dtype=float)
    w_main, w_mirror = _weights(g)
    return g.a2 * (
        w_main * aliased_lorentzian(g.alpha, omega - g.beta, delta, k_max)
        + w_mirror * aliased_lorentzian(g.alpha, omega + g.beta, delta, k_max)
    )


def aliased_comp_spectrum(g: GeometricParams, omega, delta: float, k_max: int | None = DEFAULT_K):
    omega = np.asarray(omega, dtype=float)
    amp = g.a2 / 4.0 * (1.0 / g.rho**2 - g.rho**2)
    body = aliased_lorentzian(g.alpha, omega - g.beta, delta, k_max) + aliased_lorentzian(
        g.alpha, omega + g.beta, delta, k_max
    )
    return amp * body * np.exp(2j * g.psi)


def spectral_matrix(g: GeometricParams, omega, delta: float, k_max: int | None = DEFAULT_K) -> SpectralValue:
    """Aliased spectral matrix entries at each ``omega``.

    Raises
    ------
    RealizabilityError
        If the determinant is negative beyond round-off.
    """
    omega = np.asarray(omega, dtype=float)
    sv = SpectralValue(
        aliased_psd(g, omega, delta, k_max),
        aliased_psd(g, -omega, delta, k_max),
        aliased_comp_spectrum(g, omega, delta, k_max),
    )
    det = sv.determinant
    if np.any(det < -1e-12 * sv.s_pos * sv.s_neg):
        raise RealizabilityError("spectral matrix is not positive semi-definite")
    return sv


def autocovariance(g: GeometricParams, tau):
    """s(tau) = E[z(t + tau) z*(t)].

    (A^2/(8 alpha)) e^{-alpha|tau|} [(1/rho + rho)^2 e^{i beta tau} + (1/rho - rho)^2 e^{-i beta tau}]
    """
    tau = np.asarray(tau, dtype=float)
    w_main, w_mirror = _weights(g)
    decay = g.a2 / (2 * g.alpha) * np.exp(-g.alpha * np.abs(tau))
    return decay * (w_main * np.exp(1j * g.beta * tau) + w_mirror * np.exp(-1j * g.beta * tau))


def comp_autocovariance(g: GeometricParams, tau):
    """r(tau) = E[z(t + tau) z(t)] = (A^2/(4 alpha))(1/rho^2 - rho^2) e^{2 i psi} e^{-alpha|tau|} cos(beta tau)."""
    tau = np.asarray(tau, dtype=float)
    amp = g.a2 / (4 * g.alpha) * (1.0 / g.rho**2 - g.rho**2)
    return amp * np.exp(2j * g.psi) * np.exp(-g.alpha * np.abs(tau)) * np.cos(g.beta * tau)


def _cartesian_circular(g: GeometricParams, omega):
    """Spectra of the unstretched components: S_x~, S_y~ and the cross-spectrum S_x~y~."""
    lm = lorentzian(g.alpha, omega - g.beta)
    lp = lorentzian(g.alpha, omega + g.beta)
    s_xt = g.a2 / 4 * (lm + lp)
    s_yt = g.a2 / 4 * (lm + lp)
    s_xyt = 1j * g.a2 / 4 * (lm - lp)
    return s_xt, s_yt, s_xyt


def _cartesian_deformed(g: GeometricParams, omega):
    """Stretch by P then rotate by Q, component by component."""
    s_xt, s_yt, s_xyt = _cartesian_circular(g, omega)
    c, s = np.cos(g.psi), np.sin(g.psi)
    r2 = g.rho**2
    cs = c * s
    s_x = c * c / r2 * s_xt + r2 * s * s * s_yt - cs * s_xyt - cs * np.conj(s_xyt)
    s_y = s * s / r2 * s_xt + r2 * c * c * s_yt + cs * s_xyt + cs * np.conj(s_xyt)
    s_xy = cs / r2 * s_xt - r2 * cs * s_yt + c * c * s_xyt - s * s * np.conj(s_xyt)
    return s_x, s_y, s_xy


def appendix_b_oracle(g: GeometricParams, omega) -> SpectralValue:
    """Spectra computed the long way, through the Cartesian components.

    Independent of ``psd``/``comp_spectrum``: starts from the circular
    Cartesian spectra, applies the stretch and rotation to the auto- and
    cross-spectra, and recombines into complex-valued form.
    """
    omega = np.asarray(omega, dtype=float)

    def recombine(w):
        s_x, s_y, s_xy = _cartesian_deformed(g, w)
        s_z = np.real(s_x + s_y) + 2 * np.imag(s_xy)
        r_z = np.real(s_x - s_y) + 2j * np.real(s_xy)
        return s_z, r_z

    s_pos, r_val = recombine(omega)
    s_neg, _ = recombine(-omega)
    return SpectralValue(s_pos, s_neg, r_val)
