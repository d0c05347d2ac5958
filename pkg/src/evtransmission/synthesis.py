"""Sizing of fixed-gear and two-gear transmissions from a ratio set.

Layout (three parallel shafts, two bearings each)::

    shaft 1 (input):   pinion 1 (integral), pinion 2 (loose, via clutch), clutch
    shaft 2 (counter): gear 1 (loose, via synchronizer), gear 2, synchronizer, final-drive pinion
    shaft 3 (output):  final-drive gear

First gear is engaged by the synchronizer with the clutch open; second gear
by closing the clutch with the synchronizer released. The fixed-gear variant
drops pinion 2, gear 2, the clutch and the synchronizer and fixes gear 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .config import Config, EMParams, GearboxConfig, RatioSet, VehicleParams

SIGMA_S = 2e-2 * (2.0 / (5.0 * math.pi)) ** (1.0 / 3.0)


def shaft_radius(max_torque: float, coeff: float = SIGMA_S) -> float:
    """Solid-shaft radius (m) for a design torque (Nm)."""
    if not max_torque > 0:
        raise ValueError("shaft design torque must be positive")
    return coeff * max_torque ** (1.0 / 3.0)


def gear_width(radius: float, n_teeth: int, factor: float = 16.0) -> float:
    """Face width ``factor * 2r / N_t``; with the pinion pitch radius this is
    ``factor`` modules."""
    return factor * 2.0 * radius / n_teeth


def pitch_radius(root_radius: float, n_teeth: int, pitch_param: float) -> float:
    if n_teeth <= pitch_param:
        raise ValueError("pinion teeth must exceed the pitch radius parameter")
    return root_radius / (1.0 - pitch_param / n_teeth)


def clutch_radius_coeff(gb: GearboxConfig) -> float:
    """Outer-radius coefficient of the dry clutch (the radius ratio plays the
    role of the unnamed clutch ratio in the closed form)."""
    phi = gb.clutch_radius_ratio
    if not 0.0 < phi < 1.0:
        raise ValueError("clutch_radius_ratio out of (0,1)")
    denom = (2.0 * math.pi * gb.clutch_surface_pressure
             * (gb.clutch_plate_count * gb.clutch_friction) ** 2 * (1.0 - phi**3))
    return (3.0 / denom) ** (1.0 / 3.0)


def clutch_force_coeff(gb: GearboxConfig) -> float:
    return math.pi * gb.clutch_plate_count * gb.clutch_friction * gb.clutch_surface_pressure


def size_clutch(max_torque: float, gb: GearboxConfig) -> tuple[float, float, float]:
    """Return ``(outer radius, inner radius, engagement force)``."""
    if not max_torque > 0:
        raise ValueError("clutch design torque must be positive")
    r_o = clutch_radius_coeff(gb) * max_torque ** (1.0 / 3.0)
    r_i = gb.clutch_radius_ratio * r_o
    return r_o, r_i, clutch_force_coeff(gb) * (r_o**2 - r_i**2)


def mass_and_inertia(r_outer: float, r_inner: float, width: float, density: float) -> tuple[float, float]:
    """Mass and polar inertia of an open thick-walled tube."""
    if r_inner < 0 or r_inner > r_outer:
        raise ValueError("need 0 <= r_inner <= r_outer")
    if width <= 0:
        raise ValueError("width must be positive")
    m = density * width * math.pi * (r_outer**2 - r_inner**2)
    return m, 0.5 * m * (r_outer**2 + r_inner**2)


@dataclass(frozen=True)
class Component:
    name: str
    kind: str  # shaft | gear | clutch | synchro | bearing
    shaft: int
    r_outer: float
    r_inner: float
    width: float
    mass: float
    inertia: float


@dataclass(frozen=True)
class GearPairGeometry:
    pinion_radius: float
    gear_radius: float
    width: float
    ratio: float


@dataclass(frozen=True, eq=False)
class GearboxDesign:
    ratio_set: RatioSet
    shaft_radius: tuple[float, float, float]
    shaft_length: tuple[float, float, float]
    pairs: dict[str, GearPairGeometry]  # keys "1", "2", "fd"
    center_distance: float
    clutch_outer: float | None
    clutch_inner: float | None
    clutch_force: float | None
    synchro_cone_diameter: float | None
    synchro_gap: float | None
    synchro_width: float | None
    components: tuple[Component, ...]
    wheel_inertia: float  # all wheels together
    j1: float
    j2: float

    @property
    def n_gears(self) -> int:
        return self.ratio_set.n_gears

    @property
    def mass(self) -> float:
        return sum(c.mass for c in self.components)

    @property
    def inertia(self) -> float:
        return sum(c.inertia for c in self.components)

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def count(self, kind: str) -> int:
        return sum(c.kind == kind for c in self.components)

    def ratio(self, gear: int) -> float:
        return self.ratio_set.gear_ratios()[gear - 1]

    def overall_ratio(self, gear: int) -> float:
        return self.ratio(gear) * self.ratio_set.gamma_fd

    def speed_factors(self, gear: int) -> dict[str, float]:
        """Rotational speed of every rotating body relative to the input speed."""
        g1 = self.ratio_set.gamma1
        gfd = self.ratio_set.gamma_fd
        if self.n_gears == 1:
            if gear != 1:
                raise ValueError("fixed-gear design has only gear 1")
            f = {"shaft1": 1.0, "pinion1": 1.0, "shaft2": 1 / g1, "gear1": 1 / g1,
                 "pinion_fd": 1 / g1, "shaft3": 1 / (g1 * gfd), "gear_fd": 1 / (g1 * gfd)}
            return f
        g2 = self.ratio_set.gamma2
        g = {1: g1, 2: g2}[gear]
        counter = 1.0 / g
        return {
            "shaft1": 1.0, "pinion1": 1.0, "clutch": 1.0,
            "clutch_out": g2 * counter,  # driven plate turns with pinion 2
            "pinion2": g2 * counter,
            "shaft2": counter, "gear2": counter, "synchro": counter, "pinion_fd": counter,
            "gear1": 1.0 / g1,
            "shaft3": counter / gfd, "gear_fd": counter / gfd,
        }

    def drivetrain_inertia(self, gear: int) -> float:
        """Rotating inertia of gearbox plus wheels referred to the wheel speed."""
        to_wheel = self.overall_ratio(gear)
        f = self.speed_factors(gear)
        total = self.wheel_inertia
        for c in self.components:
            if c.kind == "bearing":
                continue
            if c.name == "clutch":
                total += 0.5 * c.inertia * ((f["clutch"] * to_wheel) ** 2 + (f["clutch_out"] * to_wheel) ** 2)
            else:
                total += c.inertia * (f[c.name] * to_wheel) ** 2
        return total


def _design_torques(rs: RatioSet, t_max: float) -> tuple[float, float, float]:
    # highest selectable ratio governs counter and output shafts
    return t_max, rs.gamma1 * t_max, rs.gamma1 * rs.gamma_fd * t_max


def size_gear_pairs(rs: RatioSet, shaft_radii, gb: GearboxConfig) -> tuple[dict[str, GearPairGeometry], float]:
    """Pitch radii of every pair and the common centre distance of the shifted pairs."""
    n = rs.pinion_teeth
    r_s1, r_s2, _ = shaft_radii
    pairs = {}
    r_p1 = pitch_radius(r_s1, n, gb.pitch_param)
    r_pfd = pitch_radius(r_s2, n, gb.pitch_param)
    pairs["1"] = GearPairGeometry(r_p1, rs.gamma1 * r_p1, gear_width(r_p1, n, gb.face_width_factor), rs.gamma1)
    pairs["fd"] = GearPairGeometry(r_pfd, rs.gamma_fd * r_pfd, gear_width(r_pfd, n, gb.face_width_factor),
                                   rs.gamma_fd)
    d_g = r_p1 + pairs["1"].gear_radius
    if rs.teeth_g2 is not None:
        g2 = rs.gamma2
        r_p2 = d_g / (1.0 + g2)
        pairs["2"] = GearPairGeometry(r_p2, g2 * r_p2, gear_width(r_p2, n, gb.face_width_factor), g2)
    return pairs, d_g


def synthesize(rs: RatioSet, cfg: Config) -> GearboxDesign:
    """Deterministically size every component for ``rs``."""
    gb, em, veh, brg = cfg.gearbox, cfg.em, cfg.vehicle, cfg.bearing
    rs.validate(gb)
    rho = gb.material_density
    torques = _design_torques(rs, em.max_torque)
    coeff = SIGMA_S if gb.shaft_radius_coeff is None else gb.shaft_radius_coeff
    r_s = tuple(shaft_radius(t, coeff) for t in torques)
    pairs, d_g = size_gear_pairs(rs, r_s, gb)
    two = rs.teeth_g2 is not None

    comps: list[Component] = []

    def tube(name, kind, shaft, r_o, r_i, width):
        m, j = mass_and_inertia(r_o, r_i, width, rho)
        comps.append(Component(name, kind, shaft, r_o, r_i, width, m, j))

    p1, pfd = pairs["1"], pairs["fd"]
    tube("pinion1", "gear", 1, p1.pinion_radius, r_s[0], p1.width)
    tube("gear1", "gear", 2, p1.gear_radius, r_s[1], p1.width)
    tube("pinion_fd", "gear", 2, pfd.pinion_radius, r_s[1], pfd.width)
    tube("gear_fd", "gear", 3, pfd.gear_radius, r_s[2], pfd.width)

    len1 = p1.width + 2 * brg.width
    len2 = p1.width + pfd.width + 2 * brg.width
    clutch = (None, None, None)
    d_c = h_syn = b_syn = None
    if two:
        p2 = pairs["2"]
        tube("pinion2", "gear", 1, p2.pinion_radius, r_s[0], p2.width)
        tube("gear2", "gear", 2, p2.gear_radius, r_s[1], p2.width)
        clutch = size_clutch(em.max_torque, gb)
        r_clo, r_cli, _ = clutch
        tube("clutch", "clutch", 1, r_clo, r_cli, gb.clutch_width)
        d_c = gb.synchro_cone_diameter if gb.synchro_cone_diameter is not None else 2 * r_s[1] + 0.5 * r_clo
        h_syn = gb.synchro_gap if gb.synchro_gap is not None else 1e-3 * r_clo
        b_syn = p1.width
        tube("synchro", "synchro", 2, d_c / 2, r_s[1], b_syn)
        len1 += p2.width + gb.clutch_width
        len2 += p2.width + b_syn

    lengths = (len1, len2, gb.output_shaft_length)
    for k in range(3):
        tube(f"shaft{k + 1}", "shaft", k + 1, r_s[k], 0.0, lengths[k])
        for side in ("a", "b"):
            comps.append(Component(f"bearing{k + 1}{side}", "bearing", k + 1, brg.mean_diameter / 2,
                                   brg.mean_diameter / 2, brg.width, brg.mass, 0.0))

    wheel_inertia = veh.n_wheels * 0.5 * veh.wheel_mass * veh.wheel_radius**2
    design = GearboxDesign(
        ratio_set=rs, shaft_radius=r_s, shaft_length=lengths, pairs=pairs, center_distance=d_g,
        clutch_outer=clutch[0], clutch_inner=clutch[1], clutch_force=clutch[2],
        synchro_cone_diameter=d_c, synchro_gap=h_syn, synchro_width=b_syn,
        components=tuple(comps), wheel_inertia=wheel_inertia, j1=0.0, j2=0.0,
    )
    j1, j2 = _split_inertia(design)
    object.__setattr__(design, "j1", j1)
    object.__setattr__(design, "j2", j2)
    return design


def _split_inertia(design: GearboxDesign) -> tuple[float, float]:
    """Inertias either side of the slipping element, referred to the input shaft.

    The engine side carries the input shaft, pinion 1, the free-wheeling gear 1
    and the driving clutch plate; everything else (including the wheels) is
    referred through second gear. For the fixed-gear variant the split is
    taken at the first mesh.
    """
    rs = design.ratio_set
    names_in = {"shaft1", "pinion1"}
    if design.n_gears == 1:
        out_ratio = rs.gamma1
        j1 = sum(c.inertia for c in design.components if c.name in names_in)
        f = design.speed_factors(1)
    else:
        out_ratio = rs.gamma2
        f = design.speed_factors(2)
        clutch = design.component("clutch")
        j1 = (sum(c.inertia for c in design.components if c.name in names_in)
              + 0.5 * clutch.inertia + design.component("gear1").inertia / rs.gamma1**2)
        names_in |= {"gear1", "clutch"}
    j2 = 0.0
    for c in design.components:
        if c.kind == "bearing" or c.name in names_in:
            continue
        j2 += c.inertia * f[c.name] ** 2
    if design.n_gears == 2:
        j2 += 0.5 * design.component("clutch").inertia * f["clutch_out"] ** 2
    j2 += design.wheel_inertia / (out_ratio * rs.gamma_fd) ** 2
    return j1, j2


def gradeability_threshold(veh: VehicleParams, em: EMParams, max_grade: float) -> float:
    """Minimum overall ratio for launching on ``max_grade``."""
    return (veh.gravity * veh.wheel_radius * veh.mass
            * (veh.rolling_coeff * math.cos(max_grade) + math.sin(max_grade)) / em.max_torque)


def check_gradeability(rs: RatioSet, cfg: Config) -> tuple[bool, float]:
    """``(feasible, margin)`` with margin = overall ratio minus threshold."""
    thr = gradeability_threshold(cfg.vehicle, cfg.em, cfg.gearbox.max_grade)
    margin = rs.gamma1 * rs.gamma_fd - thr
    return margin >= 0, margin


def export_design_csv(design: GearboxDesign, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "kind", "shaft", "r_outer_m", "r_inner_m", "width_m", "mass_kg",
                    "inertia_kgm2"])
        for c in design.components:
            w.writerow([c.name, c.kind, c.shaft, repr(c.r_outer), repr(c.r_inner), repr(c.width),
                        repr(c.mass), repr(c.inertia)])
