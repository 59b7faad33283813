"""
Parameterizations of the elliptical Ornstein-Uhlenbeck process.

Two equivalent descriptions are carried side by side:

* ``EllipticalParams`` holds the coefficients of the complex SDE

      dz = (-alpha1 + i beta1) z dt + (-alpha2 + i beta2) z* dt + dW,

  with ``sigma2 = E|B|^2`` and pseudo-variance ``r = E[B^2]`` of the
  normalized increment ``B``.
* ``GeometricParams`` holds the damping ``alpha``, oscillation frequency
  ``beta``, stretch ``rho``, orientation ``psi`` and noise amplitude ``a2``
  of a circular bivariate OU that has been stretched and rotated.

The maps between the two are closed form. A proper-case mapping to the
discretely sampled complex AR(1) is also provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = [
    "ParameterError",
    "EllipticalParams",
    "GeometricParams",
    "ComplexAR1Params",
    "to_geometric",
    "to_elliptical",
    "eccentricity",
    "proper_ar1_map",
    "wrap_orientation",
    "redundant_pseudo_variance",
]

# Relative margin on beta1^2 - (alpha2^2 + beta2^2) below which the ellipse is
# treated as collapsed onto a line.
ELLIPSE_MARGIN = 1e-12


class ParameterError(ValueError):
    """Raised when a parameter set violates a model constraint."""


def wrap_orientation(psi):
    """Wrap an angle into ``(-pi/2, pi/2]`` (orientation is pi-periodic)."""
    psi = np.asarray(psi, dtype=float)
    out = psi - np.pi * np.floor((psi + np.pi / 2) / np.pi)
    # floor puts -pi/2 in the interval; move it to +pi/2.
    out = np.where(out <= -np.pi / 2, out + np.pi, out)
    return float(out) if out.ndim == 0 else out


def redundant_pseudo_variance(sigma2: float, beta1: float, alpha2: float, beta2: float) -> complex:
    """Pseudo-variance implied by the other coefficients: -(sigma2/beta1)(beta2 + i alpha2)."""
    if alpha2 == 0.0 and beta2 == 0.0:
        return 0j
    if beta1 == 0.0:
        raise ParameterError("beta1 = 0 leaves the pseudo-variance undefined")
    return complex(-(sigma2 / beta1) * beta2, -(sigma2 / beta1) * alpha2)


@dataclass(frozen=True)
class EllipticalParams:
    """Coefficients of the complex elliptical OU SDE.

    ``r`` defaults to the redundant value fixed by the other five
    coefficients; pass it explicitly only to describe a process outside the
    five-parameter family (e.g. for validation tests).
    """

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    sigma2: float
    r: complex | None = None

    def __post_init__(self):
        for name in ("alpha1", "beta1", "alpha2", "beta2", "sigma2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.r is None:
            try:
                r = redundant_pseudo_variance(self.sigma2, self.beta1, self.alpha2, self.beta2)
            except ParameterError:
                r = complex("nan")
            object.__setattr__(self, "r", r)
        else:
            object.__setattr__(self, "r", complex(self.r))

    @property
    def radius(self) -> float:
        """sqrt(alpha2^2 + beta2^2), the strength of the conjugate coupling."""
        return math.hypot(self.alpha2, self.beta2)

    def validate(self, stationary: bool = True) -> None:
        """Check the model constraints, raising ``ParameterError`` on failure."""
        if not all(math.isfinite(v) for v in (self.alpha1, self.beta1, self.alpha2, self.beta2, self.sigma2)):
            raise ParameterError("non-finite coefficient")
        if stationary and not self.alpha1 > 0:
            raise ParameterError(f"stationarity requires alpha1 > 0 (got alpha1={self.alpha1!r})")
        if self.beta1 == 0.0:
            raise ParameterError("beta1 = 0: orientation and pseudo-variance are undefined")
        m2 = self.alpha2**2 + self.beta2**2
        if self.beta1**2 - m2 < ELLIPSE_MARGIN * self.beta1**2:
            raise ParameterError(
                "valid ellipse requires beta1^2 > alpha2^2 + beta2^2 "
                f"(got beta1^2={self.beta1**2!r}, alpha2^2+beta2^2={m2!r})"
            )
        if self.sigma2 < 0:
            raise ParameterError(f"sigma2 must be non-negative (got {self.sigma2!r})")
        if not cmath_isfinite(self.r):
            raise ParameterError("pseudo-variance r is undefined")
        if abs(self.r) > self.sigma2 * (1 + 1e-12):
            raise ParameterError(f"increment law requires sigma2 >= |r| (got sigma2={self.sigma2!r}, |r|={abs(self.r)!r})")

    def is_consistent(self, rtol: float = 1e-10) -> bool:
        """True when ``r`` equals the redundant value implied by the other fields."""
        expected = redundant_pseudo_variance(self.sigma2, self.beta1, self.alpha2, self.beta2)
        scale = max(abs(expected), self.sigma2, 1e-300)
        return abs(self.r - expected) <= rtol * scale

    def drift_matrix(self) -> np.ndarray:
        """Real 2x2 drift acting on (x, y)."""
        a1, b1, a2, b2 = self.alpha1, self.beta1, self.alpha2, self.beta2
        return np.array([[-(a1 + a2), b2 - b1], [b1 + b2, a2 - a1]])

    def to_dict(self) -> dict[str, float]:
        return {
            "alpha1": self.alpha1,
            "beta1": self.beta1,
            "alpha2": self.alpha2,
            "beta2": self.beta2,
            "sigma2": self.sigma2,
            "r_re": self.r.real,
            "r_im": self.r.imag,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EllipticalParams":
        r = None
        if "r_re" in d or "r_im" in d:
            r = complex(float(d.get("r_re", 0.0)), float(d.get("r_im", 0.0)))
        return cls(d["alpha1"], d["beta1"], d["alpha2"], d["beta2"], d["sigma2"], r)


def cmath_isfinite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class GeometricParams:
    """Stretched-and-rotated circular OU: damping, frequency, stretch, angle, amplitude."""

    alpha: float
    beta: float
    rho: float
    psi: float
    a2: float

    def __post_init__(self):
        for name in ("alpha", "beta", "rho", "psi", "a2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def validate(self) -> None:
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.rho, self.psi, self.a2)):
            raise ParameterError("non-finite geometric parameter")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive (got {self.alpha!r})")
        if not 0 < self.rho <= 1:
            raise ParameterError(f"rho must lie in (0, 1] (got {self.rho!r})")
        if not -np.pi / 2 <= self.psi <= np.pi / 2:
            raise ParameterError(f"psi must lie in [-pi/2, pi/2] (got {self.psi!r})")
        if self.a2 < 0:
            raise ParameterError(f"a2 must be non-negative (got {self.a2!r})")

    @property
    def eccentricity(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.rho**4))

    def deformation(self) -> np.ndarray:
        """Rotation-after-stretch matrix QP mapping the circular process to (x, y)."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        return np.array([[c / self.rho, -s * self.rho], [s / self.rho, c * self.rho]])

    def to_dict(self) -> dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "rho": self.rho, "psi": self.psi, "a2": self.a2}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GeometricParams":
        return cls(d["alpha"], d["beta"], d["rho"], d["psi"], d["a2"])


@dataclass(frozen=True)
class ComplexAR1Params:
    """Proper complex AR(1): Z_t = lam e^{i zeta Delta} Z_{t-1} + eps_t.

    ``zeta`` is stored as a rotation rate (radians per unit time); the
    rotation applied per sample of spacing ``delta`` is ``zeta * delta``.
    """

    lam: float
    zeta: float
    sigma2_ar: float
    delta: float = 1.0

    @property
    def coefficient(self) -> complex:
        """The complex lag-one coefficient lam * exp(i zeta delta)."""
        return self.lam * complex(math.cos(self.zeta * self.delta), math.sin(self.zeta * self.delta))


def to_geometric(p: EllipticalParams) -> GeometricParams:
    """Map SDE coefficients to (alpha, beta, rho, psi, a2).

    Raises
    ------
    ParameterError
        If the process is non-stationary (alpha1 <= 0) or the coupling is too
        strong for an ellipse (beta1^2 <= alpha2^2 + beta2^2).
    """
    p.validate()
    b1 = p.beta1
    ab1 = abs(b1)
    m = p.radius
    # (|b1| - m)(|b1| + m) avoids squaring twice near the line limit
    gap = (ab1 - m) * (ab1 + m)
    beta = math.copysign(math.sqrt(gap), b1)
    rho = ((ab1 - m) / (ab1 + m)) ** 0.25
    if m == 0.0:
        psi = 0.0
    else:
        sgn = -1.0 if b1 > 0 else 1.0  # sign(-beta1)
        psi = sgn / 2.0 * math.atan2(p.alpha2, sgn * p.beta2)
        psi = wrap_orientation(psi)
    a2 = p.sigma2 * math.sqrt(gap) / ab1
    return GeometricParams(p.alpha1, beta, rho, psi, a2)


def to_elliptical(g: GeometricParams) -> EllipticalParams:
    """Map (alpha, beta, rho, psi, a2) to the six SDE coefficients, including r."""
    g.validate()
    rho2 = g.rho**2
    plus = rho2 + 1.0 / rho2
    minus = rho2 - 1.0 / rho2
    beta1 = g.beta / 2.0 * plus
    alpha2 = g.beta / 2.0 * minus * math.sin(2 * g.psi)
    beta2 = g.beta / 2.0 * minus * math.cos(2 * g.psi)
    sigma2 = g.a2 / 2.0 * plus
    # equal to -(sigma2/beta1)(beta2 + i alpha2) but free of the 1/beta1 round off
    r_mag = g.a2 / 2.0 * (1.0 / rho2 - rho2)
    r = complex(r_mag * math.cos(2 * g.psi), r_mag * math.sin(2 * g.psi))
    if g.rho == 1.0:
        alpha2 = beta2 = 0.0
        r = 0j
    return EllipticalParams(g.alpha, beta1, alpha2, beta2, sigma2, r)


def eccentricity(p: EllipticalParams) -> float:
    """Eccentricity sqrt(1 - rho^4) of the traced ellipse, in [0, 1)."""
    p.validate()
    m = p.radius
    return math.sqrt(2.0 * m / (abs(p.beta1) + m))


def proper_ar1_map(p: EllipticalParams, delta: float) -> ComplexAR1Params:
    """AR(1) obtained by sampling a proper (circular) complex OU every ``delta``.

    Only the proper case alpha2 = beta2 = r = 0 has a closed form.
    ``alpha1 = 0`` is accepted as the limiting random-walk rotation.
    """
    if not delta > 0:
        raise ParameterError(f"delta must be positive (got {delta!r})")
    if p.alpha2 != 0.0 or p.beta2 != 0.0 or abs(p.r) != 0.0:
        raise ParameterError(
            "the OU to AR(1) map has a closed form only for proper processes "
            "(alpha2 = beta2 = r = 0); the widely linear case has none"
        )
    if p.alpha1 < 0:
        raise ParameterError(f"alpha1 must be non-negative (got {p.alpha1!r})")
    lam = math.exp(-p.alpha1 * delta)
    if p.alpha1 == 0.0:
        sigma2_ar = p.sigma2 * delta
    else:
        sigma2_ar = p.sigma2 * (-math.expm1(-2 * p.alpha1 * delta)) / (2 * p.alpha1)
    return ComplexAR1Params(lam, p.beta1, sigma2_ar, delta)
