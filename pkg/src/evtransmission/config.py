"""Parameter records, defaults and configuration file handling.

All records are frozen dataclasses in SI units. Angles are radians
internally; configuration files may give any angle either as ``<name>_deg``
or ``<name>_rad`` and are always written back in radians so that a
dump/load round trip is exact.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

RPM = math.pi / 30.0


class ConfigError(ValueError):
    """Raised when one or more parameter invariants are violated.

    ``errors`` holds ``(field, message)`` pairs, one per violation.
    """

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{name}: {msg}" for name, msg in self.errors))


@dataclass(frozen=True)
class VehicleParams:
    frontal_area: float = 2.27
    drag_coeff: float = 0.29
    rolling_coeff: float = 0.01
    gravity: float = 9.81
    air_density: float = 1.225
    mass: float = 1513.0  # without gearbox
    wheel_mass: float = 20.0  # per wheel
    wheel_radius: float = 0.327
    regen_fraction: float = 0.55
    n_wheels: int = 4


@dataclass(frozen=True)
class EMParams:
    """Electric machine limits.

    ``max_power`` of ``None`` means "take the maximum of T*w over the
    efficiency-map envelope". ``efficiency_map`` is a path to a CSV map; ``None``
    selects the built-in synthetic map (see :mod:`evtransmission.motor`).
    """

    max_torque: float = 287.0
    max_speed: float = 10_000 * RPM
    max_power: float | None = None
    rated_power: float = 80e3  # envelope of the synthetic map only
    efficiency_map: str | None = None


@dataclass(frozen=True)
class ChurnCoeffs:
    """Face-drag coefficients b10..b14 for one flow regime."""

    b10: float
    b11: float
    b12: float
    b13: float
    b14: float = 0.0


def _disc_coeffs(density: float, temperature: float) -> tuple[ChurnCoeffs, ChurnCoeffs]:
    # free-disc moment coefficients (laminar 3.87 Re^-0.5, turbulent 0.146 Re^-0.2)
    # folded into b10 with the fluid density; the immersion shape factor is pi
    # at full immersion, hence the 1/pi.
    lam = ChurnCoeffs(1.935 * density**0.5 / (math.pi * temperature), 0.5, 2.5, 4.0)
    turb = ChurnCoeffs(0.073 * density**0.8 / (math.pi * temperature), 0.2, 2.8, 4.6)
    return lam, turb


_OIL_LAM, _OIL_TURB = _disc_coeffs(850.0, 80.0)
_AIR_LAM, _AIR_TURB = _disc_coeffs(1.0, 80.0)

# Xu et al. (2007) regression, units: GPa, m/s, cP, m, um
XU_EHL_COEFFS = (
    -8.916465, 1.03303, 1.036077, -0.354068, 2.812084,
    -0.100601, 0.752755, -0.390958, 0.620305,
)


@dataclass(frozen=True)
class AirProps:
    density: float = 1.0
    dynamic_viscosity: float = 2.09e-5  # air at 80 degC
    churn_laminar: ChurnCoeffs = _AIR_LAM
    churn_turbulent: ChurnCoeffs = _AIR_TURB


@dataclass(frozen=True)
class OilProps:
    """Lubricant and sump description.

    Viscosity follows the Walther law
    ``log10(log10(nu_cSt + 0.7)) = A - B*log10(T_K)``; the default constants
    correspond to an ATF-grade oil with 32 cSt at 40 degC and 6 cSt at 100 degC.
    """

    density: float = 850.0
    walther_a: float = 8.810677
    walther_b: float = 3.458033
    temperature: float = 80.0  # degC
    temperature_range: tuple[float, float] = (-20.0, 150.0)
    pressure_viscosity_coeff: float = 2.0e-8  # 1/Pa
    oil_level: float = 0.025
    ehl_coeffs: tuple[float, ...] = XU_EHL_COEFFS
    churn_laminar: ChurnCoeffs = _OIL_LAM
    churn_turbulent: ChurnCoeffs = _OIL_TURB
    reynolds_threshold: float = 2000.0
    cavity_count: float | None = None  # None: submerged fraction of the teeth
    cavity_angle: float | None = None  # None: half the angular pitch
    cavity_d3: float = 1.0
    cavity_d4: float = 1.0


@dataclass(frozen=True)
class BearingParams:
    """One representative deep-groove ball bearing (6214 class).

    The friction coefficients follow the SKF frictional-moment model and are
    used in its native units (mm, mm^2/s, N mm); ``roll_factor`` and
    ``slide_factor`` are the load-geometry constants R1 and S1 from which
    ``G_r = R1 d_m^1.96 F^0.54`` and ``G_sl = S1 d_m^-0.145 F^(5/3)`` follow.
    """

    mass: float = 1.05
    width: float = 0.024
    mean_diameter: float = 0.0975
    roll_factor: float = 4.3e-7
    slide_factor: float = 3.73e-3
    boundary_weight: float = 0.1
    boundary_coeff: float = 0.15
    ehl_coeff: float = 0.05
    inlet_reduction: float = 0.8
    starvation: float = 0.9
    drag_loss_factor: float = 1.0e-5
    element_constant: float = 1.1e-11
    oil_level_factor: float = 1.0
    geometry_factor: float = 100.0
    drag_exponent: float = -1.379
    drag_cutoff_speed: float = 1e-3  # rad/s, drag power is zero below


@dataclass(frozen=True)
class GearboxConfig:
    teeth_per_pinion: int = 17
    material_density: float = 7850.0
    max_grade: float = math.radians(7.5)
    ratio_min: float = 1.0
    ratio_max: float = 5.0
    clutch_width: float = 0.016
    output_shaft_length: float = 1.536
    shift_time: float = 0.5
    clutch_actuation_distance: float = 0.004
    synchro_actuation_force: float = 300.0
    actuator_efficiency: float = 0.8
    clutch_radius_ratio: float = 0.7
    clutch_surface_pressure: float = 1.0e6
    clutch_plate_count: int = 2
    clutch_friction: float = 0.3
    clutch_pressure_rate: float = 10.0
    slip_tolerance: float = 1.0
    helix_angle: float = math.radians(11.0)
    pressure_angle: float = math.radians(20.0)
    surface_roughness: float = 0.5e-6  # m, composite Ra
    synchro_gap: float | None = None  # None: 1e-3 * clutch outer radius
    synchro_flow_length: float = 0.005
    synchro_cone_diameter: float | None = None  # None: 2 r_s2 + 0.5 r_cl,o
    pitch_param: float = 2.5
    shaft_radius_coeff: float | None = None  # None: closed-form default
    face_width_factor: float = 16.0
    youngs_modulus: float = 190e9
    poisson_ratio: float = 0.3
    mesh_points: int = 64


@dataclass(frozen=True)
class Config:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    em: EMParams = field(default_factory=EMParams)
    oil: OilProps = field(default_factory=OilProps)
    air: AirProps = field(default_factory=AirProps)
    bearing: BearingParams = field(default_factory=BearingParams)
    gearbox: GearboxConfig = field(default_factory=GearboxConfig)


@dataclass(frozen=True)
class RatioSet:
    """Driven-gear teeth counts; ratios are ``teeth / pinion_teeth``."""

    teeth_g1: int
    teeth_fd: int
    teeth_g2: int | None = None
    pinion_teeth: int = 17

    @property
    def gamma1(self) -> float:
        return self.teeth_g1 / self.pinion_teeth

    @property
    def gamma2(self) -> float | None:
        return None if self.teeth_g2 is None else self.teeth_g2 / self.pinion_teeth

    @property
    def gamma_fd(self) -> float:
        return self.teeth_fd / self.pinion_teeth

    @property
    def n_gears(self) -> int:
        return 1 if self.teeth_g2 is None else 2

    def gear_ratios(self) -> tuple[float, ...]:
        """Selectable gearbox ratios, highest first."""
        if self.teeth_g2 is None:
            return (self.gamma1,)
        return (self.gamma1, self.gamma2)

    def key(self) -> tuple[int, int, int]:
        return (self.teeth_g1, self.teeth_g2 or 0, self.teeth_fd)

    def validate(self, gb: GearboxConfig) -> None:
        errors = []
        if self.pinion_teeth != gb.teeth_per_pinion:
            errors.append(("pinion_teeth", f"{self.pinion_teeth} != config {gb.teeth_per_pinion}"))
        for name in ("teeth_g1", "teeth_g2", "teeth_fd"):
            teeth = getattr(self, name)
            if teeth is None:
                continue
            if not isinstance(teeth, int) or teeth < 1:
                errors.append((name, "teeth count must be a natural number"))
                continue
            gamma = teeth / self.pinion_teeth
            if not gb.ratio_min - 1e-12 <= gamma <= gb.ratio_max + 1e-12:
                errors.append((name, f"ratio {gamma:.4f} outside [{gb.ratio_min}, {gb.ratio_max}]"))
        if self.teeth_g2 is not None and not self.teeth_g1 > self.teeth_g2:
            errors.append(("teeth_g2", "first gear ratio must exceed second"))
        if errors:
            raise ConfigError(errors)

    def __str__(self) -> str:
        n = self.pinion_teeth
        g2 = "" if self.teeth_g2 is None else f" g2={self.teeth_g2}/{n}"
        return f"g1={self.teeth_g1}/{n}{g2} fd={self.teeth_fd}/{n}"


def _check(errors, name, ok, msg):
    if not ok:
        errors.append((name, msg))


def validation_errors(cfg: Config) -> list[tuple[str, str]]:
    """Every violated invariant as ``(dotted.field, message)``."""
    errors: list[tuple[str, str]] = []
    v = cfg.vehicle
    for f in fields(v):
        if f.name == "regen_fraction":
            continue
        _check(errors, f"vehicle.{f.name}", getattr(v, f.name) > 0, "must be > 0")
    _check(errors, "vehicle.regen_fraction", 0.0 <= v.regen_fraction <= 1.0, "out of [0,1]")

    em = cfg.em
    _check(errors, "em.max_torque", em.max_torque > 0, "must be > 0")
    _check(errors, "em.max_speed", em.max_speed > 0, "must be > 0")
    _check(errors, "em.rated_power", em.rated_power > 0, "must be > 0")
    if em.max_power is not None:
        _check(errors, "em.max_power", em.max_power > 0, "must be > 0")
    if em.efficiency_map is not None:
        _check(errors, "em.efficiency_map", Path(em.efficiency_map).is_file(), "file not found")

    oil = cfg.oil
    _check(errors, "oil.density", oil.density > 0, "must be > 0")
    lo, hi = oil.temperature_range
    _check(errors, "oil.temperature", lo <= oil.temperature <= hi,
           f"outside Walther validity range [{lo}, {hi}]")
    if not errors or all(not e[0].startswith("oil.") for e in errors):
        from .losses import oil_viscosity

        try:
            mu, _ = oil_viscosity(oil.temperature, oil)
            _check(errors, "oil.walther", math.isfinite(mu) and mu > 0, "viscosity not finite/positive")
        except (ValueError, OverflowError) as exc:
            errors.append(("oil.walther", str(exc)))
    _check(errors, "oil.pressure_viscosity_coeff", oil.pressure_viscosity_coeff > 0, "must be > 0")
    _check(errors, "oil.oil_level", oil.oil_level >= 0, "must be >= 0")
    _check(errors, "oil.ehl_coeffs", len(oil.ehl_coeffs) == 9, "need nine coefficients b1..b9")
    for fluid_name, fluid in (("oil", oil), ("air", cfg.air)):
        for regime in ("churn_laminar", "churn_turbulent"):
            c = getattr(fluid, regime)
            _check(errors, f"{fluid_name}.{regime}", c is not None, "coefficient set missing")
            if c is not None:
                _check(errors, f"{fluid_name}.{regime}.b14", c.b14 <= 0,
                       "b14 > 0 makes the face term diverge at full immersion")
    _check(errors, "air.density", cfg.air.density > 0, "must be > 0")
    _check(errors, "air.dynamic_viscosity", cfg.air.dynamic_viscosity > 0, "must be > 0")

    b = cfg.bearing
    for f in fields(b):
        val = getattr(b, f.name)
        _check(errors, f"bearing.{f.name}", math.isfinite(val), "must be finite")
    _check(errors, "bearing.boundary_weight", 0.0 <= b.boundary_weight <= 1.0, "out of [0,1]")
    for name in ("mass", "width", "mean_diameter"):
        _check(errors, f"bearing.{name}", getattr(b, name) > 0, "must be > 0")

    g = cfg.gearbox
    _check(errors, "gearbox.teeth_per_pinion",
           isinstance(g.teeth_per_pinion, int) and g.teeth_per_pinion >= 1, "must be a natural number")
    _check(errors, "gearbox.teeth_per_pinion", g.teeth_per_pinion > g.pitch_param,
           "must exceed pitch_param (pitch radius blows up)")
    _check(errors, "gearbox.ratio_bounds", g.ratio_min <= g.ratio_max, "ratio_bounds inverted")
    _check(errors, "gearbox.ratio_min", g.ratio_min > 0, "must be > 0")
    _check(errors, "gearbox.clutch_radius_ratio", 0.0 < g.clutch_radius_ratio < 1.0,
           "clutch_radius_ratio out of (0,1)")
    _check(errors, "gearbox.actuator_efficiency", 0.0 < g.actuator_efficiency <= 1.0,
           "actuator_efficiency out of (0,1]")
    _check(errors, "gearbox.slip_tolerance", g.slip_tolerance > 0, "must be > 0")
    _check(errors, "gearbox.clutch_pressure_rate", g.clutch_pressure_rate > 0, "must be > 0")
    _check(errors, "gearbox.max_grade", 0.0 <= g.max_grade < math.pi / 2, "out of [0, pi/2)")
    for name in ("material_density", "clutch_width", "output_shaft_length", "shift_time",
                 "clutch_surface_pressure", "clutch_plate_count", "clutch_friction",
                 "synchro_flow_length", "face_width_factor", "youngs_modulus", "mesh_points"):
        _check(errors, f"gearbox.{name}", getattr(g, name) > 0, "must be > 0")
    for name in ("synchro_gap", "synchro_cone_diameter", "shaft_radius_coeff"):
        val = getattr(g, name)
        if val is not None:
            _check(errors, f"gearbox.{name}", val > 0, "must be > 0")
    _check(errors, "gearbox.poisson_ratio", 0.0 <= g.poisson_ratio < 0.5, "out of [0, 0.5)")
    return errors


def validate_config(cfg: Config | None = None) -> Config:
    """Return ``cfg`` (defaults if ``None``) or raise :class:`ConfigError`."""
    cfg = Config() if cfg is None else cfg
    errors = validation_errors(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


# --- serialization -------------------------------------------------------

_ANGLE_FIELDS = {"max_grade", "helix_angle", "pressure_angle"}
_SECTIONS = {
    "vehicle": VehicleParams, "em": EMParams, "oil": OilProps,
    "air": AirProps, "bearing": BearingParams, "gearbox": GearboxConfig,
}


def config_to_dict(cfg: Config) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in _SECTIONS:
        section = {}
        for f in fields(getattr(cfg, name)):
            val = getattr(getattr(cfg, name), f.name)
            key = f"{f.name}_rad" if f.name in _ANGLE_FIELDS else f.name
            if isinstance(val, ChurnCoeffs):
                val = dataclasses.asdict(val)
            elif isinstance(val, tuple):
                val = list(val)
            section[key] = val
        out[name] = section
    return out


def _section_from_dict(cls, data: dict[str, Any], where: str, errors: list) -> Any:
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, val in (data or {}).items():
        name = key
        if key.endswith("_deg") and key[:-4] in _ANGLE_FIELDS:
            name, val = key[:-4], math.radians(float(val))
        elif key.endswith("_rad") and key[:-4] in _ANGLE_FIELDS:
            name = key[:-4]
        if name not in known:
            errors.append((f"{where}.{key}", "unknown field"))
            continue
        default = getattr(cls(), name)
        if isinstance(default, ChurnCoeffs):
            val = ChurnCoeffs(**val)
        elif isinstance(default, tuple):
            val = tuple(val)
        elif isinstance(default, float) and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        kwargs[name] = val
    return cls(**kwargs)


def config_from_dict(data: dict[str, Any]) -> Config:
    errors: list[tuple[str, str]] = []
    parts = {}
    for key in data or {}:
        if key not in _SECTIONS:
            errors.append((key, "unknown section"))
    for name, cls in _SECTIONS.items():
        parts[name] = _section_from_dict(cls, (data or {}).get(name, {}), name, errors)
    if errors:
        raise ConfigError(errors)
    return validate_config(Config(**parts))


def load_config(path: str | Path) -> Config:
    """Read a YAML configuration; missing fields take their defaults."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "configuration must be a mapping")])
    return config_from_dict(data)


def dump_config(cfg: Config, path: str | Path | None = None) -> str:
    text = yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text


def config_hash(cfg: Config) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def with_overrides(cfg: Config, **sections: dict[str, Any]) -> Config:
    """Copy of ``cfg`` with fields replaced per section, e.g. ``gearbox={"max_grade": 0}``."""
    parts = {name: replace(getattr(cfg, name), **vals) for name, vals in sections.items()}
    return replace(cfg, **parts)
