"""Transmissivity factors, receiver noise and the assembled link budget."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import atmosphere as atm
from .beam import (
    DEFAULT_JITTER,
    BeamGeometry,
    Regime,
    beam_parameters,
    long_term_waist,
    select_regime,
)
from .errors import PhysicsDomainError
from .numerics import (
    QuadratureSpec,
    bessel_j0,
    bessel_j1,
    integrate_finite,
    integrate_semi_infinite,
)

EXTINCTION_SCALE_HEIGHT = 6600.0
DEFAULT_EXTINCTION = 5e-6  # 1/m at sea level, 800 nm
DEFAULT_A_R_INF = 100.0
ETA_CD_PRESET = 1.0 - math.exp(-1.0)  # LLO with aperture equal to LO spot

LO_MODES = ("none", "TLO", "LLO")


@dataclass(frozen=True)
class DetectorElectronics:
    """Coherent-receiver electronics; defaults are a homodyne setup at 5 MHz clock."""

    nu_det: float = 1.0
    nep: float = 6e-12           # W / sqrt(Hz)
    bandwidth: float = 100e6     # Hz
    lo_pulse: float = 10e-9      # s
    lo_power: float = 100e-3     # W
    modulation_variance: float = 8.0  # SNU
    linewidth: float = 1.6e3     # Hz
    clock: float = 5e6           # Hz

    def __post_init__(self):
        if self.nu_det not in (1, 2):
            raise ValueError("nu_det must be 1 (homodyne) or 2 (heterodyne)")
        for name in ("nep", "bandwidth", "lo_pulse", "lo_power", "modulation_variance",
                     "linewidth", "clock"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ReceiverConfig:
    """Receiver aperture, filters and coherent-detection setup.

    ``lo_mode`` is ``"none"`` (bounds only, no coherent-detection factor),
    ``"TLO"`` or ``"LLO"``.  ``eta_cd``, ``extra_photons`` and
    ``background_photons`` override the computed values when given.
    """

    aperture_radius: float
    efficiency: float = 1.0
    fov: float = 1e-10
    filter_nm: float = 1e-4
    time_window: float = 10e-9
    lo_mode: str = "none"
    detector: DetectorElectronics | None = None
    lo_spot_radius: float | None = None
    eta_cd: float | None = None
    extra_photons: float | None = None
    background_photons: float | None = None

    def __post_init__(self):
        if self.aperture_radius <= 0:
            raise ValueError("aperture radius must be positive")
        if not 0 <= self.efficiency <= 1:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.lo_mode not in LO_MODES:
            raise ValueError(f"lo_mode must be one of {LO_MODES}")
        if self.eta_cd is not None and not 0 <= self.eta_cd <= 1:
            raise ValueError("eta_cd must lie in [0, 1]")


@dataclass(frozen=True)
class LinkOptions:
    station_altitude: float = 30.0
    extinction: float = DEFAULT_EXTINCTION
    regime: str = "auto"               # "auto", "within_zi" or "beyond_zi"
    transmissivity: str = "analytic"   # or "numerical" (Huygens-Fresnel, z < z_i only)
    a_r_inf: float = DEFAULT_A_R_INF
    sky: atm.SkyRadiance = field(default_factory=atm.SkyRadiance.night)
    jitter: float = DEFAULT_JITTER


@dataclass(frozen=True)
class LinkBudget:
    eta_lt: float
    eta_atm: float
    eta_eff: float
    eta_cd: float
    eta: float
    n_b: float
    n_ex: float
    n_bar: float
    n_e: float
    distance: float = math.nan
    w_z: float = math.nan
    w_lt: float = math.nan
    rytov: float = math.nan
    regime: str = ""
    scintillation: float = math.nan
    elongation: float = math.nan

    @property
    def loss_db(self) -> float:
        return to_db(self.eta)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["loss_db"] = self.loss_db
        return d


def to_db(eta: float) -> float:
    """Loss in dB for a linear transmissivity."""
    if eta <= 0:
        return math.inf
    return -10.0 * math.log10(eta)


def eta_diffraction(w_z: float, a_r: float) -> float:
    if w_z <= 0 or a_r < 0:
        raise ValueError("need w_z > 0 and a_R >= 0")
    return -math.expm1(-2.0 * a_r**2 / w_z**2)


def eta_longterm_analytic(w_lt: float, a_r: float) -> float:
    """Long-term transmissivity of a Gaussian patch of waist ``w_lt``."""
    return eta_diffraction(w_lt, a_r)


def _irradiance_params(beam: BeamGeometry, z: float, sigma_ry2: float):
    p = beam_parameters(beam, z)
    y = 1.41 * sigma_ry2 * p.lambda_ ** (5.0 / 6.0)
    c = 2.0 * math.sqrt(2.0) / p.w_z
    return p, y, c


def _envelope(y: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.exp(-t * t - y * t ** (5.0 / 3.0))


def _cutoff(y: float, level: float = 1e-18) -> float:
    """Smallest doubling-friendly T with exp(-T^2 - y T^(5/3)) below ``level``."""
    target = -math.log(level)
    t = 1.0
    while t * t + y * t ** (5.0 / 3.0) > target:
        t *= 0.5
    while t * t + y * t ** (5.0 / 3.0) < target:
        t *= 1.25
    return t


def mean_irradiance(
    r: float,
    z: float,
    beam: BeamGeometry,
    sigma_ry2: float,
    regime: Regime | str,
    inner_scale: float = atm.DEFAULT_INNER_SCALE,
    spec: QuadratureSpec | None = None,
) -> float:
    """Relative mean irradiance at radius ``r`` in the receiver plane."""
    if r < 0 or z <= 0:
        raise ValueError("need r >= 0 and z > 0")
    w0 = beam.waist
    if Regime(regime) is Regime.BEYOND_ZI:
        w_lt = long_term_waist(beam, z, sigma_ry2, inner_scale, Regime.BEYOND_ZI)
        return w0**2 / w_lt**2 * math.exp(-2.0 * r**2 / w_lt**2)

    p, y, c = _irradiance_params(beam, z, sigma_ry2)
    env = _envelope(y)
    cr = c * r
    t_scale = _cutoff(y, 1e-3)
    period = 2.0 * math.pi / cr if cr > 0 else None
    integral = integrate_semi_infinite(
        lambda t: t * bessel_j0(cr * t) * env(t), spec, initial_cutoff=t_scale, period=period
    )
    return 2.0 * w0**2 / p.w_z**2 * integral


def aperture_power(
    a: float,
    z: float,
    beam: BeamGeometry,
    sigma_ry2: float,
    regime: Regime | str,
    inner_scale: float = atm.DEFAULT_INNER_SCALE,
    spec: QuadratureSpec | None = None,
) -> float:
    """Mean irradiance integrated over a centred disc of radius ``a``.

    For the weak/moderate form the radial integral is taken inside the
    t-integral, using int_0^a r J0(c r t) dr = a J1(c a t) / (c t).
    """
    if a < 0:
        raise ValueError("disc radius must be non-negative")
    w0 = beam.waist
    if a == 0:
        return 0.0
    if Regime(regime) is Regime.BEYOND_ZI:
        w_lt = long_term_waist(beam, z, sigma_ry2, inner_scale, Regime.BEYOND_ZI)
        return 0.5 * math.pi * w0**2 * -math.expm1(-2.0 * a**2 / w_lt**2)

    p, y, c = _irradiance_params(beam, z, sigma_ry2)
    env = _envelope(y)
    ca = c * a
    t_max = _cutoff(y)
    n_periods = max(1, int(ca * t_max / math.pi))
    integral = integrate_finite(
        lambda t: bessel_j1(ca * t) * env(t), 0.0, t_max, spec,
        breakpoints=np.linspace(0.0, t_max, n_periods + 1)[1:-1],
    )
    return 2.0 * w0**2 / p.w_z**2 * 2.0 * math.pi * a / c * integral


def eta_longterm_numerical(
    beam: BeamGeometry,
    z: float,
    sigma_ry2: float,
    a_r: float,
    a_r_inf: float = DEFAULT_A_R_INF,
    regime: Regime | str = Regime.WITHIN_ZI,
    inner_scale: float = atm.DEFAULT_INNER_SCALE,
    spec: QuadratureSpec | None = None,
) -> float:
    """Huygens-Fresnel transmissivity normalised on a disc of radius ``a_r_inf``."""
    if not 0 < a_r <= a_r_inf:
        raise ValueError("need 0 < a_R <= a_R_inf")
    if a_r == a_r_inf:
        return 1.0
    num = aperture_power(a_r, z, beam, sigma_ry2, regime, inner_scale, spec)
    den = aperture_power(a_r_inf, z, beam, sigma_ry2, regime, inner_scale, spec)
    return min(1.0, num / den)


def eta_atmospheric(alpha0: float, h0: float, z: float) -> float:
    """Beer-Lambert extinction on a horizontal path at altitude ``h0``."""
    if z < 0:
        raise ValueError("distance must be non-negative")
    if math.isinf(h0):
        return 1.0
    return math.exp(-alpha0 * math.exp(-h0 / EXTINCTION_SCALE_HEIGHT) * z)


@dataclass(frozen=True)
class AltitudeCurve:
    """Altitude sampled along a path, indexed by arc length from the station."""

    s: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if s.shape != h.shape or s.ndim != 1 or s.size < 2:
            raise ValueError("need matching 1-D arrays with at least two samples")
        if np.any(np.diff(s) <= 0):
            raise ValueError("arc length must be strictly increasing")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "h", h)

    @property
    def length(self) -> float:
        return float(self.s[-1] - self.s[0])

    def __call__(self, s):
        return np.interp(s, self.s, self.h)

    @classmethod
    def straight(cls, length: float, h0: float, zenith: float, earth_radius: float,
                 samples: int = 4001) -> "AltitudeCurve":
        """Geometric (unrefracted) path; samples cluster near the station."""
        u = np.linspace(0.0, 1.0, samples)
        s = length * u**3
        r0 = earth_radius + h0
        h = np.sqrt(r0**2 + s**2 + 2.0 * r0 * s * math.cos(zenith)) - earth_radius
        return cls(s, h)

    @classmethod
    def constant(cls, length: float, h0: float) -> "AltitudeCurve":
        return cls(np.array([0.0, length]), np.array([h0, h0]))


def optical_depth(alpha0: float, path: AltitudeCurve, spec: QuadratureSpec | None = None) -> float:
    def integrand(s):
        return alpha0 * np.exp(-path(s) / EXTINCTION_SCALE_HEIGHT)

    return integrate_finite(integrand, float(path.s[0]), float(path.s[-1]), spec,
                            breakpoints=path.s[1:-1:max(1, path.s.size // 400)])


def eta_atmospheric_slant(alpha0: float, path: AltitudeCurve, spec: QuadratureSpec | None = None) -> float:
    """Extinction along an altitude-varying path."""
    return math.exp(-optical_depth(alpha0, path, spec))


def eta_llo(a_r: float, lo_spot: float) -> float:
    """Mode-matching efficiency of a locally generated LO."""
    if a_r < 0 or lo_spot <= 0:
        raise ValueError("need a_R >= 0 and W_L0 > 0")
    return -math.expm1(-(a_r**2) / lo_spot**2)


def eta_coherent_detection(receiver: ReceiverConfig) -> float:
    if receiver.eta_cd is not None:
        return receiver.eta_cd
    if receiver.lo_mode == "LLO":
        spot = receiver.lo_spot_radius or receiver.aperture_radius
        return eta_llo(receiver.aperture_radius, spot)
    return 1.0


def detector_noise(det: DetectorElectronics, wavelength: float) -> float:
    """Electronic-noise photon term Theta of a coherent receiver."""
    photon_energy = 2.0 * math.pi * atm.HBAR_C / wavelength
    return det.nu_det * det.nep**2 * det.bandwidth * det.lo_pulse / (2.0 * photon_energy * det.lo_power)


def extra_photons(det: DetectorElectronics, eta: float, wavelength: float, mode: str) -> float:
    """Receiver-generated noise photons for a transmitted or local LO."""
    theta = detector_noise(det, wavelength)
    if mode == "TLO":
        if eta <= 0:
            raise PhysicsDomainError("TLO extra-photon number diverges at eta = 0")
        return theta / eta
    if mode == "LLO":
        return theta + math.pi * eta * det.modulation_variance * det.linewidth / det.clock
    raise ValueError(f"extra photons are defined for TLO/LLO, not {mode!r}")


def _regime_for(options: LinkOptions, z: float, z_i: float) -> Regime:
    if options.regime == "auto":
        return select_regime(z, z_i)
    return Regime(options.regime)


def finish_budget(
    receiver: ReceiverConfig,
    eta_lt: float,
    eta_atm_: float,
    n_b: float,
    wavelength: float,
    **context,
) -> LinkBudget:
    """Combine transmissivities and noise terms into a LinkBudget."""
    eta_eff = receiver.efficiency
    eta_cd = eta_coherent_detection(receiver)
    eta = eta_lt * eta_eff * eta_cd * eta_atm_
    if receiver.extra_photons is not None:
        n_ex = receiver.extra_photons
    elif receiver.detector is not None and receiver.lo_mode in ("TLO", "LLO"):
        n_ex = extra_photons(receiver.detector, eta, wavelength, receiver.lo_mode)
    else:
        n_ex = 0.0
    n_bar = eta_eff * n_b + n_ex
    if eta >= 1.0:
        raise PhysicsDomainError("eta = 1: Eve's input noise n/(1-eta) diverges")
    return LinkBudget(
        eta_lt=eta_lt, eta_atm=eta_atm_, eta_eff=eta_eff, eta_cd=eta_cd, eta=eta,
        n_b=n_b, n_ex=n_ex, n_bar=n_bar, n_e=n_bar / (1.0 - eta), **context,
    )


def sky_photons(receiver: ReceiverConfig, sky: atm.SkyRadiance, wavelength: float) -> float:
    if receiver.background_photons is not None:
        return receiver.background_photons
    return atm.background_photons(sky, receiver.filter_nm, receiver.time_window, receiver.fov,
                                  receiver.aperture_radius, wavelength)


def assemble_budget(
    beam: BeamGeometry,
    receiver: ReceiverConfig,
    profile: atm.TurbulenceProfile,
    z: float,
    options: LinkOptions | None = None,
    spec: QuadratureSpec | None = None,
) -> LinkBudget:
    """Full horizontal-link budget at distance ``z``."""
    options = options or LinkOptions()
    if z <= 0:
        raise ValueError("distance must be positive")
    k = beam.k
    cn2 = float(profile.cn2(options.station_altitude))
    sigma2 = atm.rytov_plane(cn2, k, z)
    z_i = atm.coherence_length_zi(cn2, k, profile.inner_scale) if cn2 > 0 else math.inf
    regime = _regime_for(options, z, z_i)
    w_z = beam_parameters(beam, z).w_z
    w_lt = long_term_waist(beam, z, sigma2, profile.inner_scale, regime)
    if options.transmissivity == "numerical":
        eta_lt = eta_longterm_numerical(beam, z, sigma2, receiver.aperture_radius, options.a_r_inf,
                                        regime, profile.inner_scale, spec)
    else:
        eta_lt = eta_longterm_analytic(w_lt, receiver.aperture_radius)
    eta_atm_ = eta_atmospheric(options.extinction, options.station_altitude, z)
    n_b = sky_photons(receiver, options.sky, beam.wavelength)
    return finish_budget(receiver, eta_lt, eta_atm_, n_b, beam.wavelength,
                         distance=z, w_z=w_z, w_lt=w_lt, rytov=sigma2, regime=regime.value)
