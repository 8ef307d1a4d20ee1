"""JSON scenarios: loading, validation, conversion to model objects and evaluation.

Every physical input carries its unit in the field name (``waist_cm``,
``distance_km`` ...).  The schema lives in ``data/scenario.schema.json``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import atmosphere as atm
from . import satellite as sat
from .beam import BeamGeometry
from .capacity import all_bounds
from .channel import DetectorElectronics, LinkBudget, LinkOptions, ReceiverConfig, assemble_budget
from .cvqkd import ProtocolParams, composable_rate, simulate_estimation_batch
from .errors import ConvergenceError, PhysicsDomainError

SCHEMA_VERSION = 1

# short axis aliases -> scenario field
AXES = {
    "z": "distance_km",
    "h": "altitude_km",
    "theta": "zenith_rad",
    "N": "block_size",
    "a_R": "aperture_radius_cm",
}

SWEEP_COLUMNS = (
    "index", "axis", "value", "distance_m", "eta_lt", "eta_atm", "eta_eff", "eta_cd", "eta",
    "loss_db", "n_b", "n_ex", "n_bar", "n_e", "w_lt_m", "rytov", "scintillation", "elongation",
    "regime", "plob", "k_ub", "k_lb", "rate_bits_per_use", "rate_bits_per_s", "error",
)


class SchemaError(ValueError):
    """The scenario document is malformed or fails validation."""

    def __init__(self, messages):
        self.messages = [messages] if isinstance(messages, str) else list(messages)
        super().__init__("; ".join(self.messages))


def _schema(name: str) -> dict:
    return json.loads(resources.files("fsoqkd").joinpath(f"data/{name}").read_text())


def scenario_schema() -> dict:
    return _schema("scenario.schema.json")


def result_schema() -> dict:
    return _schema("result.schema.json")


def parse_text(text: str, source: str = "<string>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validate(doc)
    return doc


def load_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    return parse_text(text, str(path))


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def validate(doc) -> None:
    """Schema validation plus the cross-field rules JSON Schema cannot express."""
    validator = jsonschema.Draft202012Validator(scenario_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise SchemaError([f"{_field_path(e)}: {e.message}" for e in errors])
    problems = []
    kind = link_kind(doc)
    for name, grid in doc.get("sweep", {}).items():
        if any(b < a for a, b in zip(grid, grid[1:])):
            problems.append(f"/sweep/{name}: grid must be sorted ascending")
        if name == "distance_km" and kind != "horizontal":
            problems.append("/sweep/distance_km: needs a horizontal link")
        if name in ("altitude_km", "zenith_rad") and kind != "satellite":
            problems.append(f"/sweep/{name}: needs a satellite link")
        if name == "block_size":
            if "protocol" not in doc:
                problems.append("/sweep/block_size: needs a protocol section")
            if any(v != int(v) or v < 2 for v in grid):
                problems.append("/sweep/block_size: values must be integers >= 2")
        if name == "zenith_rad" and any(not 0 <= v < math.pi / 2 for v in grid):
            problems.append("/sweep/zenith_rad: values must lie in [0, pi/2)")
        if name in ("distance_km", "altitude_km", "aperture_radius_cm") and any(v <= 0 for v in grid):
            problems.append(f"/sweep/{name}: values must be positive")
    if problems:
        raise SchemaError(problems)


def link_kind(doc: dict) -> str:
    return next(iter(doc["link"]))


def resolve_axis(name: str) -> str:
    return AXES.get(name, name)


def with_axis_value(doc: dict, field_name: str, value) -> dict:
    """Copy of ``doc`` with one sweepable field replaced."""
    out = copy.deepcopy(doc)
    out.pop("sweep", None)
    kind = link_kind(out)
    if field_name in ("distance_km", "altitude_km", "zenith_rad"):
        out["link"][kind][field_name] = value
    elif field_name == "block_size":
        out["protocol"]["block_size"] = int(value)
    elif field_name == "aperture_radius_cm":
        out["receiver"]["aperture_radius_cm"] = value
    else:
        raise SchemaError(f"unknown sweep axis {field_name!r}")
    return out


# --- conversion -------------------------------------------------------------

def _sky(value) -> atm.SkyRadiance:
    if value is None or value == "night":
        return atm.SkyRadiance.night()
    if value == "day":
        return atm.SkyRadiance.day()
    return atm.SkyRadiance(value["brightness_w_m2_nm_sr"])


def build_beam(d: dict) -> BeamGeometry:
    return BeamGeometry.from_curvature(d["waist_cm"] * 1e-2, d["wavelength_nm"] * 1e-9, d.get("curvature_m"))


def build_detector(d: dict | None) -> DetectorElectronics | None:
    if d is None:
        return None
    base = DetectorElectronics()
    return DetectorElectronics(
        nu_det=d.get("nu_det_snu", base.nu_det),
        nep=d.get("nep_w_per_rthz", base.nep),
        bandwidth=d.get("bandwidth_mhz", base.bandwidth * 1e-6) * 1e6,
        lo_pulse=d.get("lo_pulse_ns", base.lo_pulse * 1e9) * 1e-9,
        lo_power=d.get("lo_power_mw", base.lo_power * 1e3) * 1e-3,
        modulation_variance=d.get("modulation_variance_snu", base.modulation_variance),
        linewidth=d.get("linewidth_khz", base.linewidth * 1e-3) * 1e3,
        clock=d.get("clock_mhz", base.clock * 1e-6) * 1e6,
    )


def build_receiver(d: dict) -> ReceiverConfig:
    lo_mode = d.get("lo_mode", "none")
    detector = build_detector(d.get("detector"))
    if detector is None and lo_mode != "none":
        detector = DetectorElectronics()
    spot = d.get("lo_spot_radius_cm")
    return ReceiverConfig(
        aperture_radius=d["aperture_radius_cm"] * 1e-2,
        efficiency=d.get("efficiency", 1.0),
        fov=d.get("fov_sr", 1e-10),
        filter_nm=d.get("filter_nm", 1e-4),
        time_window=d.get("time_window_ns", 10.0) * 1e-9,
        lo_mode=lo_mode,
        detector=detector,
        lo_spot_radius=None if spot is None else spot * 1e-2,
        eta_cd=d.get("eta_cd"),
        extra_photons=d.get("extra_photons"),
        background_photons=d.get("background_photons"),
    )


def build_profile(d: dict) -> atm.TurbulenceProfile:
    scales = {}
    if "inner_scale_mm" in d:
        scales["inner_scale"] = d["inner_scale_mm"] * 1e-3
    if "outer_scale_m" in d:
        scales["outer_scale"] = d["outer_scale_m"]
    kind = d["kind"]
    if kind == "constant":
        return atm.TurbulenceProfile.constant(d["cn2_m-2/3"], **scales)
    if kind == "hufnagel_valley":
        return atm.TurbulenceProfile.hufnagel_valley(d["wind_speed_m_per_s"], d["ground_cn2_m-2/3"], **scales)
    preset = atm.TurbulenceProfile.hv_night() if kind == "night" else atm.TurbulenceProfile.hv_day()
    return atm.TurbulenceProfile.hufnagel_valley(preset.wind_speed, preset.ground_value, **scales)


def build_protocol(d: dict | None) -> ProtocolParams | None:
    if d is None:
        return None
    base = ProtocolParams()
    return ProtocolParams(
        mu=d.get("mu_snu", base.mu),
        beta=d.get("beta", base.beta),
        block_size=int(d.get("block_size", base.block_size)),
        r_pe=d.get("r_pe", base.r_pe),
        d=d.get("digitization", base.d),
        eps_s=d.get("eps_s", base.eps_s),
        eps_h=d.get("eps_h", base.eps_h),
        eps_cor=d.get("eps_cor", base.eps_cor),
        w=d.get("w", base.w),
        p_ec=d.get("p_ec", base.p_ec),
    )


@dataclass(frozen=True)
class Scenario:
    name: str | None
    beam: BeamGeometry
    receiver: ReceiverConfig
    profile: atm.TurbulenceProfile
    kind: str
    distance: float | None
    link_options: LinkOptions | None
    geometry: sat.SatelliteGeometry | None
    downlink_options: sat.DownlinkOptions | None
    protocol: ProtocolParams | None
    clock: float
    estimation: dict | None

    def budget(self) -> LinkBudget:
        if self.kind == "horizontal":
            return assemble_budget(self.beam, self.receiver, self.profile, self.distance, self.link_options)
        return sat.downlink_budget(self.geometry, self.beam, self.receiver, self.profile, self.downlink_options)


def build(doc: dict, base_dir: Path | None = None) -> Scenario:
    """Convert a validated document into model objects; bad values raise SchemaError."""
    try:
        return _build(doc, base_dir)
    except (ValueError, KeyError, OSError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"invalid scenario value: {exc}") from None


def _build(doc: dict, base_dir: Path | None) -> Scenario:
    kind = link_kind(doc)
    link = doc["link"][kind]
    distance = link_options = geometry = downlink_options = None
    if kind == "horizontal":
        base = LinkOptions()
        distance = link["distance_km"] * 1e3
        link_options = LinkOptions(
            station_altitude=link.get("station_altitude_m", base.station_altitude),
            extinction=link.get("extinction_per_m", base.extinction),
            regime=link.get("regime", base.regime),
            transmissivity=link.get("transmissivity", base.transmissivity),
            a_r_inf=link.get("a_r_inf_m", base.a_r_inf),
            sky=_sky(link.get("sky")),
            jitter=link.get("jitter_rad2", base.jitter),
        )
    else:
        geometry = sat.SatelliteGeometry(
            altitude=link["altitude_km"] * 1e3,
            station_altitude=link.get("station_altitude_m", 30.0),
            zenith=link.get("zenith_rad", sat.MASK_ANGLE),
            earth_radius=link.get("earth_radius_km", sat.EARTH_RADIUS * 1e-3) * 1e3,
        )
        layers = None
        if "layers_file" in link:
            path = Path(link["layers_file"])
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            layers = sat.LayeredAtmosphere.from_json(json.loads(path.read_text()))
        downlink_options = sat.DownlinkOptions(
            extinction=link.get("extinction_per_m", sat.DEFAULT_EXTINCTION),
            sky=_sky(link.get("sky")),
            elongation=link.get("elongation", "table"),
            layers=layers,
        )
    proto = doc.get("protocol")
    return Scenario(
        name=doc.get("name"),
        beam=build_beam(doc["beam"]),
        receiver=build_receiver(doc["receiver"]),
        profile=build_profile(doc["profile"]),
        kind=kind,
        distance=distance,
        link_options=link_options,
        geometry=geometry,
        downlink_options=downlink_options,
        protocol=build_protocol(proto),
        clock=(proto or {}).get("clock_mhz", 100.0) * 1e6,
        estimation=doc.get("estimation"),
    )


# --- evaluation -------------------------------------------------------------

def _err(exc: Exception) -> dict:
    return {"error": f"{type(exc).__name__}: {exc}"}


def _clean(value):
    """JSON-safe floats: nan becomes null and infinities become strings."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return None
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    return value


def evaluate(s: Scenario, seed: int | None = None) -> tuple[dict, Exception | None]:
    """Result document plus the budget exception (if the budget itself failed)."""
    out: dict = {"schema_version": SCHEMA_VERSION, "name": s.name, "link": s.kind}
    try:
        budget = s.budget()
    except (PhysicsDomainError, ConvergenceError, ValueError) as exc:
        msg = {"error": "link budget unavailable"}
        out.update(budget=_err(exc), bounds=msg)
        if s.protocol is not None:
            out["rate"] = msg
        return _clean(out), exc
    out["budget"] = budget.to_dict()
    try:
        out["bounds"] = all_bounds(budget.eta, budget.n_bar)
    except (PhysicsDomainError, ValueError) as exc:
        out["bounds"] = _err(exc)
    if s.protocol is not None:
        try:
            rec = composable_rate(s.protocol, budget.eta, budget.n_bar)
            out["rate"] = {**rec.to_dict(), "clock_hz": s.clock,
                           "bits_per_second": rec.bits_per_second(s.clock)}
        except (PhysicsDomainError, ValueError) as exc:
            out["rate"] = _err(exc)
    if s.estimation is not None:
        mu = s.protocol.mu if s.protocol is not None else ProtocolParams().mu
        try:
            etas, ns = simulate_estimation_batch(budget.eta, budget.n_bar, mu, s.estimation["samples"],
                                                 s.estimation["trials"], seed)
            out["estimation"] = {
                "seed": seed, "samples": s.estimation["samples"], "trials": s.estimation["trials"],
                "eta_hat_mean": float(etas.mean()), "eta_hat_std": float(etas.std(ddof=1)) if etas.size > 1 else 0.0,
                "n_hat_mean": float(ns.mean()), "n_hat_std": float(ns.std(ddof=1)) if ns.size > 1 else 0.0,
            }
        except ValueError as exc:
            out["estimation"] = _err(exc)
    return _clean(out), None


def check_result(doc: dict) -> None:
    jsonschema.validate(doc, result_schema())


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int) or (float(value).is_integer() and abs(value) < 1e15):
        return str(int(value))
    return f"{float(value):.10g}"


def sweep_row(doc: dict, field_name: str, index: int, value, base_dir: Path | None = None) -> list[str]:
    """One CSV row (as strings, in SWEEP_COLUMNS order) for a single grid point."""
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(index=str(index), axis=field_name, value=_fmt(value))
    errors = []
    try:
        s = build(with_axis_value(doc, field_name, value), base_dir)
        result, _ = evaluate(s)
    except SchemaError as exc:
        errors.append(str(exc))
        result = {}
    budget = result.get("budget", {})
    if "error" in budget:
        errors.append(f"budget: {budget['error']}")
    else:
        for key in ("eta_lt", "eta_atm", "eta_eff", "eta_cd", "eta", "loss_db", "n_b", "n_ex", "n_bar",
                    "n_e", "rytov", "scintillation", "elongation", "regime"):
            if budget.get(key) is not None:
                row[key] = budget[key]
        row["distance_m"] = budget.get("distance")
        row["w_lt_m"] = budget.get("w_lt")
    bounds = result.get("bounds", {})
    for key in ("plob", "k_ub", "k_lb"):
        v = bounds.get(key)
        if isinstance(v, dict):
            errors.append(f"{key}: {v['error']}")
        else:
            row[key] = v
    rate = result.get("rate")
    if isinstance(rate, dict):
        if "error" in rate:
            if "error" not in budget:
                errors.append(f"rate: {rate['error']}")
        else:
            row["rate_bits_per_use"] = rate["rate"]
            row["rate_bits_per_s"] = rate["bits_per_second"]
    row["error"] = "; ".join(errors)
    return [_fmt(row[c]) for c in SWEEP_COLUMNS]
