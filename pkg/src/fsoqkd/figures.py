"""Built-in parameter presets and the data series behind figures 1-6.

Each ``figN`` function returns ``{filename: (header, rows)}`` so the CLI can
write one CSV per panel.  Rows are plain tuples in a fixed order.
"""

from __future__ import annotations

import math

import numpy as np

from . import atmosphere as atm
from . import satellite as sat
from .beam import BeamGeometry, Regime, long_term_waist, select_regime, wander_pointing, wander_turbulence
from .capacity import all_bounds
from .channel import (
    ETA_CD_PRESET,
    LinkOptions,
    ReceiverConfig,
    assemble_budget,
    eta_longterm_analytic,
    eta_longterm_numerical,
)
from .cvqkd import ProtocolParams, composable_rate

WAVELENGTH = 800e-9
CONDITIONS = {
    "night": (atm.CN2_NIGHT, atm.SkyRadiance.night),
    "day": (atm.CN2_DAY, atm.SkyRadiance.day),
}
HV = {"night": atm.TurbulenceProfile.hv_night, "day": atm.TurbulenceProfile.hv_day}
A_R_INF_VALUES = (10.0, 20.0, 50.0, 100.0)

Table = tuple[tuple[str, ...], list[tuple]]


def terrestrial_beam() -> BeamGeometry:
    return BeamGeometry(0.05, WAVELENGTH)


def satellite_beam() -> BeamGeometry:
    return BeamGeometry(0.20, WAVELENGTH)


def fig4_receiver(aperture_radius: float = 0.30) -> ReceiverConfig:
    return ReceiverConfig(aperture_radius, efficiency=0.5, eta_cd=ETA_CD_PRESET, extra_photons=1e-3)


def fig6_receiver() -> ReceiverConfig:
    return ReceiverConfig(0.70, efficiency=0.5, eta_cd=ETA_CD_PRESET, extra_photons=1e-3,
                          background_photons=4.75e-10)


def fig_protocol(block_size: int) -> ProtocolParams:
    return ProtocolParams(block_size=int(block_size))


def _bound_values(eta: float, n_bar: float):
    b = all_bounds(eta, n_bar)
    vals, errs = [], []
    for key in ("plob", "k_ub", "k_lb"):
        v = b[key]
        if isinstance(v, dict):
            vals.append(math.nan)
            errs.append(f"{key}: {v['error']}")
        else:
            vals.append(v)
    return vals, "; ".join(errs)


def fig1(points: int = 50) -> dict[str, Table]:
    """Pointing-error wander, turbulence wander and long-term waist versus distance."""
    beam = terrestrial_beam()
    profile = atm.TurbulenceProfile.constant(atm.CN2_NIGHT)
    z_i = atm.coherence_length_zi(atm.CN2_NIGHT, beam.k, profile.inner_scale)
    rows = []
    for z in np.geomspace(1.4e3, 200e3, points):
        s2 = atm.rytov_plane(atm.CN2_NIGHT, beam.k, z)
        w_lt = long_term_waist(beam, z, s2, profile.inner_scale, select_regime(z, z_i))
        rows.append((z / 1e3, s2, wander_pointing(z),
                     wander_turbulence(beam, z, atm.CN2_NIGHT, profile.outer_scale, s2), w_lt**2))
    return {"fig1.csv": (("z_km", "rytov", "sigma_pe2_m2", "sigma_tb2_m2", "w_lt2_m2"), rows)}


def fig2(points: int = 30, a_r: float = 0.05) -> dict[str, Table]:
    """Analytic and Huygens-Fresnel long-term transmissivity for z < z_i."""
    beam = terrestrial_beam()
    rows = []
    for z in np.geomspace(1e3, 120e3, points):
        s2 = atm.rytov_plane(atm.CN2_NIGHT, beam.k, z)
        analytic = eta_longterm_analytic(long_term_waist(beam, z, s2, atm.DEFAULT_INNER_SCALE), a_r)
        numeric = [eta_longterm_numerical(beam, z, s2, a_r, a_inf) for a_inf in A_R_INF_VALUES]
        rows.append((z / 1e3, analytic, *numeric))
    header = ("z_km", "eta_analytic", *(f"eta_numerical_{a:g}m" for a in A_R_INF_VALUES))
    return {"fig2.csv": (header, rows)}


FIG3_PANELS = {"a": (1.0, 0.0), "b": (0.5, 0.01), "c": (0.5, 0.05)}


def fig3_point(z: float, condition: str, efficiency: float, n_ex: float, regime: Regime) -> tuple:
    cn2, sky = CONDITIONS[condition]
    receiver = ReceiverConfig(0.05, efficiency=efficiency, extra_photons=n_ex)
    options = LinkOptions(regime=regime.value, sky=sky())
    budget = assemble_budget(terrestrial_beam(), receiver, atm.TurbulenceProfile.constant(cn2), z, options)
    vals, err = _bound_values(budget.eta, budget.n_bar)
    return budget.eta, budget.n_bar, vals, err


def fig3(points: int = 60) -> dict[str, Table]:
    """Capacity bounds versus distance, both long-term waist branches.

    ``selected`` marks the branch used at that distance (within z_i below
    z_i, beyond z_i above) and ``junction`` marks the grid point at z = z_i.
    """
    k = terrestrial_beam().k
    header = ("condition", "z_km", "branch", "selected", "junction", "eta", "n_bar", "plob", "k_ub", "k_lb",
              "error")
    out = {}
    for panel, (eff, n_ex) in FIG3_PANELS.items():
        rows = []
        for condition, (cn2, _) in CONDITIONS.items():
            z_i = atm.coherence_length_zi(cn2, k, atm.DEFAULT_INNER_SCALE)
            grid = sorted(set(np.geomspace(1e3, 300e3, points).tolist()) | {z_i})
            for z in grid:
                for regime in Regime:
                    eta, n_bar, vals, err = fig3_point(z, condition, eff, n_ex, regime)
                    selected = select_regime(z, z_i) is regime or z == z_i
                    rows.append((condition, z / 1e3, regime.value, int(selected), int(z == z_i),
                                 eta, n_bar, *vals, err))
        out[f"fig3{panel}.csv"] = (header, rows)
    return out


def fig4_point(condition: str, block_size: int, aperture_radius: float = 0.30, z: float = 10e3):
    cn2, sky = CONDITIONS[condition]
    budget = assemble_budget(terrestrial_beam(), fig4_receiver(aperture_radius), atm.TurbulenceProfile.constant(cn2),
                             z, LinkOptions(sky=sky()))
    return budget, composable_rate(fig_protocol(block_size), budget.eta, budget.n_bar)


def fig4(points: int = 31) -> dict[str, Table]:
    """Composable rate versus block size (a) and aperture radius (b)."""
    rows_a = []
    for condition in CONDITIONS:
        for n in np.unique(np.round(np.logspace(6, 12, points)).astype(np.int64)):
            budget, rec = fig4_point(condition, int(n))
            rows_a.append((condition, int(n), budget.eta, budget.n_bar, rec.rate, rec.rate_raw))
    rows_b = []
    for n in (10**7, 10**8, 10**9, 10**10):
        for a_r in np.linspace(0.05, 0.50, 46):
            budget, rec = fig4_point("night", n, float(a_r))
            rows_b.append((n, float(a_r) * 100, budget.eta, budget.n_bar, rec.rate, rec.rate_raw))
    return {
        "fig4a.csv": (("condition", "block_size", "eta", "n_bar", "rate", "rate_raw"), rows_a),
        "fig4b.csv": (("block_size", "aperture_radius_cm", "eta", "n_bar", "rate", "rate_raw"), rows_b),
    }


def fig5(points: int = 60) -> dict[str, Table]:
    """Slant scintillation versus zenith (a) and altitude (b); elongated vs geometric loss (c)."""
    rows_a = []
    for condition, make in HV.items():
        profile = make()
        for theta in np.linspace(0.0, 1.56, points):
            rows_a.append((condition, float(theta),
                           sat.slant_scintillation(profile, WAVELENGTH, float(theta), 400e3)))
    rows_b = []
    for condition, make in HV.items():
        profile = make()
        for theta in (1.0, sat.MASK_ANGLE):
            for h in np.geomspace(1e3, 1000e3, points):
                rows_b.append((condition, theta, h / 1e3,
                               sat.slant_scintillation(profile, WAVELENGTH, theta, float(h))))
    rows_c = []
    receiver = ReceiverConfig(0.40, efficiency=0.5)
    profile = HV["night"]()
    for h in np.linspace(100e3, 1500e3, points):
        g = sat.SatelliteGeometry(float(h))
        geo = sat.downlink_budget(g, satellite_beam(), receiver, profile, sat.DownlinkOptions(elongation="none"))
        bent = sat.downlink_budget(g, satellite_beam(), receiver, profile)
        rows_c.append((h / 1e3, sat.slant_range(g) / 1e3, bent.elongation, geo.loss_db, bent.loss_db))
    return {
        "fig5a.csv": (("condition", "zenith_rad", "scintillation"), rows_a),
        "fig5b.csv": (("condition", "zenith_rad", "altitude_km", "scintillation"), rows_b),
        "fig5c.csv": (("altitude_km", "slant_range_km", "elongation", "loss_geometric_db", "loss_elongated_db"),
                      rows_c),
    }


def fig6_point(altitude: float, block_size: int) -> sat.DownlinkRate:
    return sat.downlink_key_rate(sat.SatelliteGeometry(altitude), satellite_beam(), fig6_receiver(),
                                 HV["night"](), fig_protocol(block_size), clock=100e6)


def fig6(points: int = 40) -> dict[str, Table]:
    """Satellite composable rate versus altitude (a) and block size (b)."""
    header = ("altitude_km", "block_size", "loss_db", "rate", "bits_per_second")
    rows_a = []
    for n in (10**10, 10**11, 10**12, 10**13):
        for h in np.linspace(100e3, 1000e3, points):
            r = fig6_point(float(h), n)
            rows_a.append((h / 1e3, n, r.budget.loss_db, r.rate.rate, r.bits_per_second))
    rows_b = []
    for h in (300e3, 400e3, 500e3):
        for n in np.unique(np.round(np.logspace(8, 14, points)).astype(np.int64)):
            r = fig6_point(h, int(n))
            rows_b.append((h / 1e3, int(n), r.budget.loss_db, r.rate.rate, r.bits_per_second))
    return {"fig6a.csv": (header, rows_a), "fig6b.csv": (header, rows_b)}


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}
