"""Slant-path geometry, refractive path elongation and satellite downlinks.

The ray trace treats the atmosphere as spherically stratified with a
refractive index that is linear in altitude inside each layer, and uses the
invariant n(r) r sin(zenith) = const.  The zenith angle of a downlink is the
apparent angle at the ground station, so the bent ray is launched from the
station at that angle and followed up to the satellite altitude.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import atmosphere as atm
from .beam import BeamGeometry, Regime, beam_parameters, long_term_waist
from .capacity import plob_pure_loss
from .channel import (
    DEFAULT_EXTINCTION,
    AltitudeCurve,
    LinkBudget,
    ReceiverConfig,
    eta_atmospheric_slant,
    eta_longterm_analytic,
    finish_budget,
    sky_photons,
)
from .cvqkd import ProtocolParams, RateRecord, composable_rate
from .errors import PhysicsDomainError
from .numerics import QuadratureSpec, integrate_finite

EARTH_RADIUS = 6.37e6
MASK_ANGLE = 4.0 * math.pi / 9.0


class TraceError(PhysicsDomainError):
    """The ray cannot propagate through the layer table (turning point)."""


@dataclass(frozen=True)
class SatelliteGeometry:
    altitude: float
    station_altitude: float = 30.0
    zenith: float = MASK_ANGLE
    earth_radius: float = EARTH_RADIUS

    def __post_init__(self):
        if not self.altitude > self.station_altitude >= 0:
            raise ValueError("need altitude > station_altitude >= 0")
        if not 0 <= self.zenith <= math.pi / 2:
            raise ValueError("zenith angle must lie in [0, pi/2]")


@dataclass(frozen=True)
class Layer:
    top: float
    n_base: float
    n_top: float


@dataclass(frozen=True)
class LayeredAtmosphere:
    """Stacked layers starting at sea level; vacuum (n = 1) above the last top."""

    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(l if isinstance(l, Layer) else Layer(*l) for l in self.layers)
        object.__setattr__(self, "layers", layers)
        tops = [l.top for l in layers]
        if not layers or tops[0] <= 0 or any(b <= a for a, b in zip(tops, tops[1:])):
            raise ValueError("layer tops must be positive and strictly increasing")
        if any(min(l.n_base, l.n_top) < 1 for l in layers):
            raise ValueError("refractive indices must be >= 1")

    @property
    def top(self) -> float:
        return self.layers[-1].top

    @property
    def bases(self) -> list[float]:
        return [0.0] + [l.top for l in self.layers[:-1]]

    def index(self, h):
        """Refractive index at altitude(s) ``h``."""
        h = np.asarray(h, dtype=float)
        out = np.ones_like(h)
        for base, layer in zip(self.bases, self.layers):
            inside = (h >= base) & (h <= layer.top)
            frac = (h - base) / (layer.top - base)
            out = np.where(inside, layer.n_base + frac * (layer.n_top - layer.n_base), out)
        return float(out) if out.ndim == 0 else out

    @classmethod
    def vacuum(cls, tops: Sequence[float] = (1e4, 5e4, 1e5)) -> "LayeredAtmosphere":
        return cls(tuple(Layer(t, 1.0, 1.0) for t in tops))

    @classmethod
    def from_json(cls, data) -> "LayeredAtmosphere":
        rows = data["layers"] if isinstance(data, dict) else data
        return cls(tuple(Layer(float(r["top_m"]), float(r["n_base"]), float(r["n_top"])) for r in rows))

    def to_json(self) -> dict:
        return {"layers": [{"top_m": l.top, "n_base": l.n_base, "n_top": l.n_top} for l in self.layers]}

    @classmethod
    def default(cls) -> "LayeredAtmosphere":
        """Ten-layer standard-atmosphere table at 800 nm shipped with the package."""
        text = resources.files("fsoqkd").joinpath("data/standard_atmosphere_800nm.json").read_text()
        return cls.from_json(json.loads(text))


# US Standard Atmosphere 1976 below 86 km: (base altitude m, base temperature K, lapse K/m)
_US76 = [
    (0.0, 288.15, -6.5e-3),
    (11000.0, 216.65, 0.0),
    (20000.0, 216.65, 1.0e-3),
    (32000.0, 228.65, 2.8e-3),
    (47000.0, 270.65, 0.0),
    (51000.0, 270.65, -2.8e-3),
    (71000.0, 214.65, -2.0e-3),
]
_GMR = 9.80665 * 0.0289644 / 8.3144598  # K per metre


def us76_temperature_pressure(h: float) -> tuple[float, float]:
    """Temperature [K] and pressure [hPa] of the 1976 standard atmosphere (altitude taken as geopotential)."""
    p = 1013.25
    for i, (hb, tb, lapse) in enumerate(_US76):
        h_top = _US76[i + 1][0] if i + 1 < len(_US76) else math.inf
        hh = min(h, h_top)
        if lapse == 0:
            t = tb
            p_end = p * math.exp(-_GMR * (hh - hb) / tb)
        else:
            t = tb + lapse * (hh - hb)
            p_end = p * (t / tb) ** (-_GMR / lapse)
        if h <= h_top:
            return t, p_end
        p = p_end
    raise AssertionError("unreachable")


def refractive_index_air(h: float, wavelength: float = 800e-9) -> float:
    """Optical refractive index of standard dry air at altitude ``h``."""
    t, p = us76_temperature_pressure(h)
    lam_um = wavelength * 1e6
    refractivity = 77.6e-6 * (1.0 + 7.52e-3 / lam_um**2) * p / t
    return 1.0 + refractivity


DEFAULT_LAYER_TOPS = (1e3, 3e3, 6e3, 11e3, 20e3, 32e3, 47e3, 51e3, 71e3, 86e3)


def standard_atmosphere_layers(wavelength: float = 800e-9,
                               tops: Sequence[float] = DEFAULT_LAYER_TOPS) -> LayeredAtmosphere:
    bases = [0.0, *tops[:-1]]
    return LayeredAtmosphere(tuple(
        Layer(top, refractive_index_air(base, wavelength), refractive_index_air(top, wavelength))
        for base, top in zip(bases, tops)
    ))


def slant_range(g: SatelliteGeometry) -> float:
    r_sat = g.earth_radius + g.altitude
    r0 = g.earth_radius + g.station_altitude
    c = math.cos(g.zenith)
    return math.sqrt(r_sat**2 + r0**2 * (c * c - 1.0)) - r0 * c


@dataclass(frozen=True)
class ElongatedPath:
    optical_length: float
    altitude_curve: AltitudeCurve
    elongation_factor: float


def _segments(g: SatelliteGeometry, table: LayeredAtmosphere):
    """(h_start, h_end, n_start, n_end) pieces from the station up to the satellite."""
    out = []
    for base, layer in zip(table.bases, table.layers):
        lo, hi = max(base, g.station_altitude), min(layer.top, g.altitude)
        if hi <= lo:
            continue
        out.append((lo, hi, float(table.index(lo)), float(table.index(hi))))
    if g.altitude > table.top:
        lo = max(table.top, g.station_altitude)
        out.append((lo, g.altitude, 1.0, 1.0))
    return out


def elongated_path(
    g: SatelliteGeometry,
    table: LayeredAtmosphere | None = None,
    samples_per_segment: int = 400,
    spec: QuadratureSpec | None = None,
) -> ElongatedPath:
    """Trace the refracted ray from the station to the satellite altitude."""
    table = table or LayeredAtmosphere.default()
    re = g.earth_radius
    r0 = re + g.station_altitude
    n0 = float(table.index(g.station_altitude)) if g.station_altitude <= table.top else 1.0
    invariant = n0 * r0 * math.sin(g.zenith)

    s_parts = [np.array([0.0])]
    h_parts = [np.array([g.station_altitude])]
    total = 0.0
    for h_a, h_b, n_a, n_b in _segments(g, table):
        r_a, r_b = re + h_a, re + h_b
        slope = (n_b - n_a) / (r_b - r_a)

        def n_of(r, n_a=n_a, r_a=r_a, slope=slope):
            return n_a + slope * (r - r_a)

        def radicand(r, n_of=n_of):
            return (n_of(r) * r) ** 2 - invariant**2

        probe = r_a + (r_b - r_a) * np.linspace(0.0, 1.0, 65)[1:]
        if np.any(radicand(probe) < 0) or radicand(r_a) < -1e-9 * r_a**2:
            raise TraceError(f"ray turns back inside the layer starting at {h_a:.0f} m")

        if slope == 0:
            kk = invariant / n_a
            def cumulative(r, kk=kk, r_a=r_a):
                return np.sqrt(np.maximum(r**2 - kk**2, 0.0)) - math.sqrt(max(r_a**2 - kk**2, 0.0))
            length = float(cumulative(r_b))
            u = np.linspace(0.0, 1.0, samples_per_segment + 1)[1:] ** 2
            r_s = r_a + (r_b - r_a) * u
            s_local = cumulative(r_s)
        else:
            # r = r_a + u^2 removes the grazing-incidence square-root singularity
            u_max = math.sqrt(r_b - r_a)

            def integrand(u, n_of=n_of, r_a=r_a):
                r = r_a + u * u
                n = n_of(r)
                rad = np.maximum((n * r) ** 2 - invariant**2, 1e-300)
                return 2.0 * u * n * r / np.sqrt(rad)

            length = integrate_finite(integrand, 0.0, u_max, spec)
            u = np.linspace(0.0, u_max, samples_per_segment + 1)
            f = integrand(u)
            s_local = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(u))])
            s_local *= length / s_local[-1]
            r_s = r_a + u[1:] ** 2
            s_local = s_local[1:]
        s_parts.append(total + s_local)
        h_parts.append(r_s - re)
        total += length

    s = np.concatenate(s_parts)
    h = np.concatenate(h_parts)
    keep = np.concatenate([[True], np.diff(s) > 0])
    curve = AltitudeCurve(s[keep], h[keep])
    factor = total / slant_range(g)
    if 1.0 - 1e-12 < factor < 1.0:
        factor = 1.0  # rounding between the piecewise and closed-form lengths
    return ElongatedPath(total, curve, factor)


def geometric_path(g: SatelliteGeometry, factor: float = 1.0) -> ElongatedPath:
    """Straight slant path, optionally stretched by a fixed elongation factor."""
    if factor < 1:
        raise ValueError("elongation factor must be >= 1")
    z = slant_range(g)
    straight = AltitudeCurve.straight(z, g.station_altitude, g.zenith, g.earth_radius)
    curve = AltitudeCurve(straight.s * factor, straight.h) if factor != 1 else straight
    return ElongatedPath(z * factor, curve, factor)


@dataclass(frozen=True)
class DownlinkOptions:
    extinction: float = DEFAULT_EXTINCTION
    sky: atm.SkyRadiance = field(default_factory=atm.SkyRadiance.night)
    elongation: str | float = "table"   # "table", "none" or a fixed factor >= 1
    layers: LayeredAtmosphere | None = None


def downlink_path(g: SatelliteGeometry, options: DownlinkOptions) -> ElongatedPath:
    if options.elongation == "table":
        return elongated_path(g, options.layers)
    if options.elongation == "none":
        return geometric_path(g)
    return geometric_path(g, float(options.elongation))


def downlink_budget(
    g: SatelliteGeometry,
    beam: BeamGeometry,
    receiver: ReceiverConfig,
    profile: atm.TurbulenceProfile,
    options: DownlinkOptions | None = None,
    spec: QuadratureSpec | None = None,
) -> LinkBudget:
    """Loss and noise budget for a satellite-to-ground link.

    Beam spreading uses the geometric slant range with the slant Rytov
    variance in the within-z_i spread factor; refraction only lengthens the
    path used for extinction.
    """
    options = options or DownlinkOptions()
    if g.zenith >= math.pi / 2:
        raise PhysicsDomainError("slant Rytov variance diverges at the horizon")
    z = slant_range(g)
    sigma2 = atm.rytov_slant(profile, beam.k, g.zenith, g.station_altitude, g.altitude, spec)
    scint = atm.scintillation_from_rytov(sigma2)
    w_z = beam_parameters(beam, z).w_z
    w_lt = long_term_waist(beam, z, sigma2, profile.inner_scale, Regime.WITHIN_ZI)
    eta_lt = eta_longterm_analytic(w_lt, receiver.aperture_radius)
    path = downlink_path(g, options)
    eta_atm_ = eta_atmospheric_slant(options.extinction, path.altitude_curve, spec)
    n_b = sky_photons(receiver, options.sky, beam.wavelength)
    return finish_budget(
        receiver, eta_lt, eta_atm_, n_b, beam.wavelength,
        distance=z, w_z=w_z, w_lt=w_lt, rytov=sigma2,
        regime="strong" if atm.is_strong_slant(scint) else "weak",
        scintillation=scint, elongation=path.elongation_factor,
    )


@dataclass(frozen=True)
class DownlinkRate:
    budget: LinkBudget
    rate: RateRecord
    clock: float
    plob: float

    @property
    def bits_per_second(self) -> float:
        return self.rate.bits_per_second(self.clock)

    def to_dict(self) -> dict:
        return {
            "budget": self.budget.to_dict(),
            "rate": self.rate.to_dict(),
            "clock_hz": self.clock,
            "plob": self.plob,
            "bits_per_second": self.bits_per_second,
        }


def downlink_key_rate(
    g: SatelliteGeometry,
    beam: BeamGeometry,
    receiver: ReceiverConfig,
    profile: atm.TurbulenceProfile,
    protocol: ProtocolParams,
    clock: float = 100e6,
    options: DownlinkOptions | None = None,
) -> DownlinkRate:
    budget = downlink_budget(g, beam, receiver, profile, options)
    return DownlinkRate(budget, composable_rate(protocol, budget.eta, budget.n_bar), clock,
                        plob_pure_loss(budget.eta))


def at_altitude(g: SatelliteGeometry, h: float) -> SatelliteGeometry:
    return replace(g, altitude=h)


def slant_scintillation(profile: atm.TurbulenceProfile, wavelength: float, zenith: float,
                        altitude: float, station_altitude: float = 30.0,
                        spec: QuadratureSpec | None = None) -> float:
    sigma2 = atm.rytov_slant(profile, atm.wavenumber(wavelength), zenith, station_altitude, altitude, spec)
    return atm.scintillation_from_rytov(sigma2)


def unit_scintillation_angle(profile: atm.TurbulenceProfile, wavelength: float, altitude: float,
                             station_altitude: float = 30.0, bracket=(0.5, 1.56)) -> float:
    """Zenith angle at which the slant scintillation index equals 1."""

    def f(theta):
        return slant_scintillation(profile, wavelength, theta, altitude, station_altitude) - 1.0

    return brentq(f, *bracket, xtol=1e-10)
