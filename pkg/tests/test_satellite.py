import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsoqkd import atmosphere as atm
from fsoqkd import satellite as sat
from fsoqkd.beam import BeamGeometry
from fsoqkd.channel import ETA_CD_PRESET, ReceiverConfig
from fsoqkd.cvqkd import ProtocolParams
from fsoqkd.errors import PhysicsDomainError
from oracles import shell_ray_length

NIGHT = atm.TurbulenceProfile.hv_night()
BEAM = BeamGeometry(0.20, 800e-9)
FIG5_RX = ReceiverConfig(0.40, efficiency=0.5)
FIG6_RX = ReceiverConfig(0.70, efficiency=0.5, eta_cd=ETA_CD_PRESET, extra_photons=1e-3,
                         background_photons=4.75e-10)


def test_geometry_validation():
    with pytest.raises(ValueError):
        sat.SatelliteGeometry(10.0, 30.0)
    with pytest.raises(ValueError):
        sat.SatelliteGeometry(5e5, 30.0, 2.0)


def test_slant_range_zenith():
    assert sat.slant_range(sat.SatelliteGeometry(5e5, 30.0, 0.0)) == pytest.approx(5e5 - 30.0, rel=1e-14)


@given(st.floats(0.0, 1.57), st.floats(1e5, 2e6))
def test_slant_range_law_of_cosines(theta, h):
    g = sat.SatelliteGeometry(h, 30.0, theta)
    z = sat.slant_range(g)
    r0 = g.earth_radius + 30.0
    assert r0**2 + z**2 + 2 * r0 * z * math.cos(theta) == pytest.approx((g.earth_radius + h) ** 2, rel=1e-12)


def test_us76_reference_points():
    assert sat.us76_temperature_pressure(0.0) == pytest.approx((288.15, 1013.25))
    t, p = sat.us76_temperature_pressure(11000.0)
    assert (t, p) == pytest.approx((216.65, 226.32), rel=1e-4)
    assert sat.us76_temperature_pressure(20000.0)[1] == pytest.approx(54.748, rel=1e-3)
    assert sat.us76_temperature_pressure(32000.0)[1] == pytest.approx(8.6801, rel=1e-3)
    assert sat.us76_temperature_pressure(47000.0)[1] == pytest.approx(1.1090, rel=1e-3)


def test_sea_level_refractivity():
    assert sat.refractive_index_air(0.0) - 1 == pytest.approx(2.76e-4, rel=0.01)


def test_packaged_table_matches_generator():
    data = json.loads(resources.files("fsoqkd").joinpath("data/standard_atmosphere_800nm.json").read_text())
    assert len(data["layers"]) == 10
    assert sat.LayeredAtmosphere.from_json(data) == sat.standard_atmosphere_layers(800e-9)


def test_layer_table_validation():
    with pytest.raises(ValueError):
        sat.LayeredAtmosphere(((2e3, 1.0, 1.0), (1e3, 1.0, 1.0)))
    with pytest.raises(ValueError):
        sat.LayeredAtmosphere(((1e3, 0.9, 1.0),))


def test_vacuum_has_no_elongation():
    g = sat.SatelliteGeometry(5e5, 30.0, sat.MASK_ANGLE)
    path = sat.elongated_path(g, sat.LayeredAtmosphere.vacuum())
    assert path.elongation_factor == 1.0
    assert path.optical_length == pytest.approx(sat.slant_range(g), rel=1e-12)


def test_radial_ray_has_no_elongation():
    path = sat.elongated_path(sat.SatelliteGeometry(5e5, 30.0, 0.0))
    assert path.elongation_factor == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30)
@given(st.floats(0.0, 1.5), st.floats(1e5, 1.5e6))
def test_elongation_at_least_one(theta, h):
    assert sat.elongated_path(sat.SatelliteGeometry(h, 30.0, theta)).elongation_factor >= 1.0


@pytest.mark.parametrize("theta", [0.6, 1.2, sat.MASK_ANGLE, 1.5])
def test_ray_length_against_shell_oracle(theta):
    table = sat.LayeredAtmosphere.default()
    g = sat.SatelliteGeometry(120e3, 30.0, theta)
    ref = shell_ray_length(table.index, 30.0, 120e3, theta, g.earth_radius, shells=20000)
    assert sat.elongated_path(g, table).optical_length == pytest.approx(ref, rel=1e-7)


def test_trapped_ray_raises():
    steep = sat.LayeredAtmosphere(((1e3, 1.5, 1.0), (5e4, 1.0, 1.0)))
    with pytest.raises(sat.TraceError):
        sat.elongated_path(sat.SatelliteGeometry(5e5, 30.0, 1.5), steep)


def test_altitude_curve_endpoints():
    g = sat.SatelliteGeometry(5e5, 30.0, sat.MASK_ANGLE)
    path = sat.elongated_path(g)
    assert path.altitude_curve.h[0] == 30.0
    assert path.altitude_curve.h[-1] == pytest.approx(5e5, rel=1e-12)
    assert path.altitude_curve.length == pytest.approx(path.optical_length, rel=1e-12)


def test_fixed_factor_override():
    g = sat.SatelliteGeometry(5e5, 30.0, sat.MASK_ANGLE)
    p = sat.geometric_path(g, 1.01)
    assert p.optical_length == pytest.approx(1.01 * sat.slant_range(g))
    with pytest.raises(ValueError):
        sat.geometric_path(g, 0.9)


def test_weak_regime_at_one_radian():
    g = sat.SatelliteGeometry(4e5, 30.0, 1.0)
    b = sat.downlink_budget(g, BEAM, FIG5_RX, NIGHT)
    assert b.regime == "weak" and b.scintillation < 1


def test_horizon_rejected():
    with pytest.raises(PhysicsDomainError):
        sat.downlink_budget(sat.SatelliteGeometry(4e5, 30.0, math.pi / 2), BEAM, FIG5_RX, NIGHT)


def test_zenith_geometric_and_elongated_agree():
    g = sat.SatelliteGeometry(5e5, 30.0, 0.0)
    bent = sat.downlink_budget(g, BEAM, FIG5_RX, NIGHT)
    geo = sat.downlink_budget(g, BEAM, FIG5_RX, NIGHT, sat.DownlinkOptions(elongation="none"))
    assert abs(bent.loss_db - geo.loss_db) < 0.01


def test_elongated_loss_above_geometric():
    for h in np.linspace(100e3, 1500e3, 15):
        g = sat.SatelliteGeometry(float(h))
        bent = sat.downlink_budget(g, BEAM, FIG5_RX, NIGHT)
        geo = sat.downlink_budget(g, BEAM, FIG5_RX, NIGHT, sat.DownlinkOptions(elongation="none"))
        assert bent.loss_db > geo.loss_db


def test_loss_at_500km_in_band():
    b = sat.downlink_budget(sat.SatelliteGeometry(5e5), BEAM, FIG5_RX, NIGHT)
    assert b.loss_db == pytest.approx(16.4, abs=1.5)


def test_eta_nonincreasing_in_altitude():
    etas = [sat.downlink_budget(sat.SatelliteGeometry(float(h)), BEAM, FIG5_RX, NIGHT).eta
            for h in np.linspace(50e3, 2000e3, 30)]
    assert np.all(np.diff(etas) <= 0)


def test_rate_decreases_with_altitude():
    proto = ProtocolParams(block_size=10**12)
    rates = [sat.downlink_key_rate(sat.SatelliteGeometry(float(h)), BEAM, FIG6_RX, NIGHT, proto).rate.rate
             for h in np.linspace(200e3, 1000e3, 17)]
    positive = [r for r in rates if r > 0]
    assert positive and np.all(np.diff(positive) < 0)
    assert rates[-1] == 0.0


def test_key_rate_record():
    r = sat.downlink_key_rate(sat.SatelliteGeometry(5e5), BEAM, FIG6_RX, NIGHT,
                              ProtocolParams(block_size=10**12), clock=100e6)
    assert r.bits_per_second == pytest.approx(r.rate.rate * 100e6)
    d = r.to_dict()
    assert d["budget"]["loss_db"] == pytest.approx(r.budget.loss_db)


def test_unit_scintillation_angles():
    assert sat.unit_scintillation_angle(NIGHT, 800e-9, 4e5) == pytest.approx(1.32, abs=0.05)
    assert sat.unit_scintillation_angle(atm.TurbulenceProfile.hv_day(), 800e-9, 4e5) == pytest.approx(1.0, abs=0.05)
