"""Gaussian-beam geometry, turbulent spreading and centroid wander."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .numerics import QuadratureSpec, integrate_finite

DEFAULT_JITTER = 1e-12  # rad^2, i.e. 1 urad rms pointing error


class Regime(str, Enum):
    """Which long-term waist expression applies."""

    WITHIN_ZI = "within_zi"
    BEYOND_ZI = "beyond_zi"


@dataclass(frozen=True)
class BeamGeometry:
    """Transmitted Gaussian beam.

    ``inv_curvature`` is 1/R0; zero means a collimated beam.
    """

    waist: float
    wavelength: float
    inv_curvature: float = 0.0

    def __post_init__(self):
        if self.waist <= 0 or self.wavelength <= 0:
            raise ValueError("waist and wavelength must be positive")

    @classmethod
    def from_curvature(cls, waist: float, wavelength: float, curvature: float | None) -> "BeamGeometry":
        if curvature is None or math.isinf(curvature):
            return cls(waist, wavelength, 0.0)
        if curvature == 0:
            raise ValueError("R0 = 0 is not a valid phase-front curvature")
        return cls(waist, wavelength, 1.0 / curvature)

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def rayleigh_length(self) -> float:
        return math.pi * self.waist**2 / self.wavelength

    @property
    def curvature(self) -> float:
        return math.inf if self.inv_curvature == 0 else 1.0 / self.inv_curvature


@dataclass(frozen=True)
class BeamAtReceiver:
    omega0: float
    lambda0: float
    omega: float
    lambda_: float
    w_z: float
    w_lt: float | None = None


def diffraction_waist(beam: BeamGeometry, z: float) -> float:
    if z < 0:
        raise ValueError("distance must be non-negative")
    focus = 1.0 - z * beam.inv_curvature
    return beam.waist * math.sqrt(focus**2 + (z / beam.rayleigh_length) ** 2)


def beam_parameters(beam: BeamGeometry, z: float) -> BeamAtReceiver:
    """Transmitter- and receiver-plane (Omega, Lambda) pairs at distance ``z``."""
    if z <= 0:
        raise ValueError("distance must be positive")
    omega0 = 1.0 - z * beam.inv_curvature
    lambda0 = 2.0 * z / (beam.k * beam.waist**2)
    denom = omega0**2 + lambda0**2
    return BeamAtReceiver(
        omega0=omega0,
        lambda0=lambda0,
        omega=omega0 / denom,
        lambda_=lambda0 / denom,
        w_z=diffraction_waist(beam, z),
    )


def spread_within_zi(sigma_ry2: float, lam: float) -> float:
    return 1.63 * sigma_ry2 ** (6.0 / 5.0) * lam


def spread_beyond_zi(sigma_ry2: float, lam: float, z: float, k: float, inner_scale: float) -> float:
    q_m = 35.05 * z / (k * inner_scale**2)
    q = 0.74 * sigma_ry2 * q_m ** (1.0 / 6.0)
    return 4.0 / 3.0 * q * lam


def long_term_waist(
    beam: BeamGeometry,
    z: float,
    sigma_ry2: float,
    inner_scale: float,
    regime: Regime | str = Regime.WITHIN_ZI,
) -> float:
    """Long-term beam waist at the receiver for the requested regime."""
    if sigma_ry2 < 0:
        raise ValueError("Rytov variance must be non-negative")
    p = beam_parameters(beam, z)
    if Regime(regime) is Regime.WITHIN_ZI:
        spread = spread_within_zi(sigma_ry2, p.lambda_)
    else:
        spread = spread_beyond_zi(sigma_ry2, p.lambda_, z, beam.k, inner_scale)
    return p.w_z * math.sqrt(1.0 + spread)


def long_term_waist_both(beam: BeamGeometry, z: float, sigma_ry2: float, inner_scale: float):
    """Both branch values, for inspecting the mismatch at the junction."""
    return (long_term_waist(beam, z, sigma_ry2, inner_scale, Regime.WITHIN_ZI),
            long_term_waist(beam, z, sigma_ry2, inner_scale, Regime.BEYOND_ZI))


def select_regime(z: float, z_i: float) -> Regime:
    return Regime.WITHIN_ZI if z < z_i else Regime.BEYOND_ZI


def wander_pointing(z: float, jitter_coeff: float = DEFAULT_JITTER) -> float:
    if z < 0:
        raise ValueError("distance must be non-negative")
    return jitter_coeff * z**2


def wander_turbulence(
    beam: BeamGeometry,
    z: float,
    cn2: float,
    outer_scale: float,
    sigma_ry2: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Turbulence-induced centroid wander variance [m^2]."""
    if z <= 0:
        raise ValueError("distance must be positive")
    if cn2 == 0:
        return 0.0
    p = beam_parameters(beam, z)
    w0 = beam.waist
    kappa0 = 2.0 * math.pi / outer_scale
    spread0 = 1.63 * sigma_ry2 ** (6.0 / 5.0) * p.lambda0
    outer = kappa0 ** (1.0 / 3.0) * w0 ** (1.0 / 3.0)

    def integrand(xi):
        f = (p.omega0 + (1.0 - p.omega0) * xi) ** 2 + spread0 * (1.0 - xi) ** (16.0 / 5.0)
        return xi**2 * (f ** (-1.0 / 6.0) - outer / (1.0 + kappa0**2 * w0**2 * f) ** (1.0 / 6.0))

    return 7.25 * cn2 * w0 ** (-1.0 / 3.0) * z**3 * integrate_finite(integrand, 0.0, 1.0, spec)
