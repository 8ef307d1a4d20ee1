"""Turbulence strength and sky-background models.

Covers Cn^2 profiles (constant or Hufnagel-Valley), Rytov variances for
horizontal and slant paths, the coherence scales, the saturated scintillation
index and the sky background photon number per detected mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import constants

from .numerics import QuadratureSpec, integrate_finite

HBAR_C = constants.hbar * constants.c

# Sky brightness [W m^-2 nm^-1 sr^-1] reproducing 4.75e-12 / 4.75e-7 photons
# per mode for a 5 cm aperture with the nominal filters.
SKY_NIGHT = 1.5e-6
SKY_DAY = 1.5e-1

DEFAULT_INNER_SCALE = 1e-3
DEFAULT_OUTER_SCALE = 1.0

CN2_NIGHT = 1.28e-14
CN2_DAY = 2.06e-14


class Wave(str, Enum):
    PLANE = "plane"
    SPHERICAL = "spherical"


_COHERENCE_COEFF = {Wave.PLANE: 0.55, Wave.SPHERICAL: 1.46}


@dataclass(frozen=True)
class TurbulenceProfile:
    """Refractive-index structure description.

    ``kind`` is ``"constant"`` (uses ``cn2_const``) or ``"hufnagel_valley"``
    (uses ``wind_speed`` and ``ground_value``).
    """

    kind: str = "constant"
    cn2_const: float | None = CN2_NIGHT
    wind_speed: float | None = None
    ground_value: float | None = None
    inner_scale: float = DEFAULT_INNER_SCALE
    outer_scale: float = DEFAULT_OUTER_SCALE

    def __post_init__(self):
        if self.kind == "constant":
            if self.cn2_const is None or self.cn2_const < 0:
                raise ValueError("constant profile needs cn2_const >= 0")
        elif self.kind == "hufnagel_valley":
            if self.wind_speed is None or self.wind_speed < 0:
                raise ValueError("Hufnagel-Valley profile needs wind_speed >= 0")
            if self.ground_value is None or self.ground_value <= 0:
                raise ValueError("Hufnagel-Valley profile needs ground_value > 0")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not 0 < self.inner_scale < self.outer_scale:
            raise ValueError("need 0 < inner_scale < outer_scale")

    @classmethod
    def constant(cls, cn2: float, **kw) -> "TurbulenceProfile":
        return cls(kind="constant", cn2_const=cn2, **kw)

    @classmethod
    def hufnagel_valley(cls, wind_speed: float, ground_value: float, **kw) -> "TurbulenceProfile":
        return cls(kind="hufnagel_valley", cn2_const=None, wind_speed=wind_speed,
                   ground_value=ground_value, **kw)

    @classmethod
    def hv_night(cls) -> "TurbulenceProfile":
        return cls.hufnagel_valley(21.0, 1.7e-14)

    @classmethod
    def hv_day(cls) -> "TurbulenceProfile":
        return cls.hufnagel_valley(57.0, 2.75e-14)

    def cn2(self, h):
        """Cn^2 at altitude ``h`` [m]."""
        if self.kind == "constant":
            return np.full_like(np.asarray(h, dtype=float), self.cn2_const) if np.ndim(h) else self.cn2_const
        return cn2_hv(h, self.wind_speed, self.ground_value)


@dataclass(frozen=True)
class SkyRadiance:
    brightness: float = SKY_NIGHT

    def __post_init__(self):
        if self.brightness < 0:
            raise ValueError("sky brightness must be non-negative")

    @classmethod
    def night(cls) -> "SkyRadiance":
        return cls(SKY_NIGHT)

    @classmethod
    def day(cls) -> "SkyRadiance":
        return cls(SKY_DAY)


def wavenumber(wavelength: float) -> float:
    return 2.0 * math.pi / wavelength


def cn2_hv(h, v: float, A: float):
    """Hufnagel-Valley Cn^2(h) [m^-2/3] for wind speed ``v`` and ground value ``A``."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("altitude must be non-negative")
    out = (5.94e-53 * (v / 27.0) ** 2 * h**10 * np.exp(-h / 1000.0)
           + 2.7e-16 * np.exp(-h / 1500.0)
           + A * np.exp(-h / 100.0))
    return float(out) if out.ndim == 0 else out


def rytov_plane(cn2: float, k: float, z: float) -> float:
    """Plane-wave Rytov variance 1.23 Cn^2 k^(7/6) z^(11/6)."""
    return 1.23 * cn2 * k ** (7.0 / 6.0) * z ** (11.0 / 6.0)


def rytov_spherical(cn2: float, k: float, z: float) -> float:
    return 0.4 * rytov_plane(cn2, k, z)


def coherence_length_zi(cn2: float, k: float, inner_scale: float) -> float:
    """Distance at which the transverse coherence radius reaches the inner scale."""
    return 1.0 / (cn2 * k**2 * inner_scale ** (5.0 / 3.0))


def spatial_coherence_radius(cn2: float, k: float, z: float, wave: Wave | str = Wave.PLANE) -> float:
    coeff = _COHERENCE_COEFF[Wave(wave)]
    denom = coeff * cn2 * k**2 * z
    if denom == 0:
        return math.inf
    return denom ** (-3.0 / 5.0)


def rytov_slant(
    profile: TurbulenceProfile,
    k: float,
    zenith: float,
    h0: float,
    h: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Rytov variance for a downlink from altitude ``h`` to a station at ``h0``."""
    if not 0 <= zenith < math.pi / 2:
        raise ValueError("zenith angle must lie in [0, pi/2)")
    if h <= h0:
        raise ValueError("satellite altitude must exceed station altitude")

    # normalise so the absolute tolerance does not swamp a ~1e-10 integral
    scale = float(profile.cn2(h0))
    if scale == 0:  # only a zero constant profile vanishes at the ground
        return 0.0

    def integrand(x):
        return (x - h0) ** (5.0 / 6.0) * (profile.cn2(x) / scale)

    # HV terms live on 100 m, 1.5 km and ~10 km scales
    bp = [h0 + d for d in (100.0, 300.0, 1e3, 3e3, 1e4, 2e4, 3e4, 5e4)]
    integral = scale * integrate_finite(integrand, h0, h, spec, breakpoints=bp)
    return 2.25 * k ** (7.0 / 6.0) * (1.0 / math.cos(zenith)) ** (11.0 / 6.0) * integral


def scintillation_from_rytov(sigma2: float) -> float:
    """Saturated scintillation index for a given (slant) Rytov variance."""
    s125 = sigma2 ** (6.0 / 5.0)
    expo = (0.49 * sigma2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0)
            + 0.51 * sigma2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return math.expm1(expo)


# limit of the saturated index when the Rytov variance diverges
SCINTILLATION_SATURATION = math.expm1(0.51 / 0.69 ** (5.0 / 6.0))


def scintillation_index(
    profile: TurbulenceProfile,
    k: float,
    zenith: float,
    h0: float,
    h: float,
    spec: QuadratureSpec | None = None,
) -> float:
    return scintillation_from_rytov(rytov_slant(profile, k, zenith, h0, h, spec))


def background_photons(
    sky: SkyRadiance | float,
    filter_nm: float,
    time_window: float,
    fov: float,
    aperture_radius: float,
    wavelength: float,
) -> float:
    """Mean sky photons per mode, pi * Gamma_R * B / (hbar omega).

    ``filter_nm`` is in nanometres to match the brightness units.
    """
    brightness = sky.brightness if isinstance(sky, SkyRadiance) else float(sky)
    vals = (brightness, filter_nm, time_window, fov, aperture_radius, wavelength)
    if min(vals) < 0:
        raise ValueError("background_photons inputs must be non-negative")
    gamma_r = filter_nm * time_window * fov * aperture_radius**2
    photon_energy = 2.0 * math.pi * HBAR_C / wavelength
    return math.pi * gamma_r * brightness / photon_energy


def is_strong_horizontal(sigma_ry2: float) -> bool:
    return sigma_ry2 >= 1.0


def is_strong_slant(scint_index: float) -> bool:
    return scint_index >= 1.0
