"""Whole-gearbox loss evaluation and the per-gear loss maps used in simulation.

The map axes are gearbox input (EM) speed and output torque at the wheels.
Torques are propagated loss-free through the active gear path; friction
models act on torque magnitudes, so regenerative operation mirrors motoring.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Config
from .interp import bilinear
from .losses import (
    air_fluid, bearing_losses, cavity_power, churning_power, clutch_windage, immersion_depth, mesh_force_profile,
    mesh_geometry, mesh_power, normal_load, oil_fluid, shaft_churning, synchro_drag, synchro_drag_coeff,
    windage_power,
)
from .synthesis import GearboxDesign


@dataclass
class LossBreakdown:
    """Named loss powers (W) sharing one broadcast shape."""

    terms: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def total(self) -> np.ndarray:
        shape = np.broadcast_shapes(*(np.shape(v) for v in self.terms.values()))
        out = np.zeros(shape)
        for v in self.terms.values():
            out = out + v
        return out

    def group(self, prefix: str) -> np.ndarray:
        return sum((v for k, v in self.terms.items() if k.startswith(prefix)), np.zeros(()))


_GEAR_BODIES = {
    "pinion1": ("1", "pinion"), "gear1": ("1", "gear"),
    "pinion2": ("2", "pinion"), "gear2": ("2", "gear"),
    "pinion_fd": ("fd", "pinion"), "gear_fd": ("fd", "gear"),
}


def _stack_aligned(arrays, ndim: int) -> np.ndarray:
    """Stack same-shape arrays along a new leading axis after left-padding them to ``ndim`` dimensions."""
    return np.stack([np.reshape(a, (1,) * (ndim - np.ndim(a)) + np.shape(a)) for a in arrays])


class GearboxLossModel:
    """Forward loss model of one synthesized design.

    Speed- and torque-independent quantities (mesh kinematics, immersion
    depths, fluid properties) are computed once at construction.
    """

    def __init__(self, design: GearboxDesign, cfg: Config):
        self.design = design
        self.cfg = cfg
        gb, oil = cfg.gearbox, cfg.oil
        self.oil_fluid = oil_fluid(oil)
        self.air_fluid = air_fluid(cfg.air, oil)
        self.meshes = {k: mesh_geometry(p, gb) for k, p in design.pairs.items()}
        self._profiles: dict[str, tuple] = {}

        # shafts stacked vertically, the lowest point of the final-drive gear at the sump floor
        pfd = design.pairs["fd"]
        z3 = pfd.gear_radius
        z2 = z3 + pfd.gear_radius + pfd.pinion_radius
        z1 = z2 + design.center_distance
        self.shaft_height = (z1, z2, z3)

        rs = design.ratio_set
        teeth = {"pinion": rs.pinion_teeth}
        self.bodies = []  # (name, r, width, immersion, n_teeth, tip, root)
        for c in design.components:
            if c.kind != "gear":
                continue
            pair_key, role = _GEAR_BODIES[c.name]
            pair = design.pairs[pair_key]
            n = rs.pinion_teeth if role == "pinion" else round(pair.ratio * rs.pinion_teeth)
            module = 2.0 * pair.pinion_radius / teeth["pinion"]
            h = float(immersion_depth(oil.oil_level, self.shaft_height[c.shaft - 1] - c.r_outer, c.r_outer))
            self.bodies.append((c.name, c.r_outer, c.width, h, n, c.r_outer + module, c.r_outer - 1.25 * module))
        self.shafts = []
        for k in range(3):
            r = design.shaft_radius[k]
            h = float(immersion_depth(oil.oil_level, self.shaft_height[k] - r, r))
            self.shafts.append((r, design.shaft_length[k], h))
        if design.n_gears == 2:
            self.sigma_syn = synchro_drag_coeff(design.synchro_cone_diameter, design.synchro_gap,
                                                gb.synchro_flow_length, oil)
            self.clutch = design.component("clutch")
        # bodies turning in air, evaluated together: every gear plus the (dry) clutch
        self._air = [(f"windage_{b[0]}", b[0], b[1], b[2], 2.0 - b[3]) for b in self.bodies]
        if design.n_gears == 2:
            self._air.append(("clutch", "clutch", self.clutch.r_outer, self.clutch.width, 2.0))
        self._air_r, self._air_b, self._air_h = (np.array([a[i] for a in self._air]) for i in (2, 3, 4))

    def _profile(self, key: str, torque: np.ndarray):
        # the final-drive torque is identical in every gear, so its profile is reused across maps
        tag = (torque.shape, torque.tobytes())
        cached = self._profiles.get(key)
        if cached is None or cached[0] != tag:
            cached = (tag, mesh_force_profile(self.meshes[key], torque, self.cfg.oil,
                                              self.cfg.gearbox.surface_roughness))
            self._profiles[key] = cached
        return cached[1]

    def evaluate(self, gear: int, omega_in, torque_out) -> LossBreakdown:
        """Loss breakdown at input speed ``omega_in`` (rad/s) and output torque
        ``torque_out`` (N m at the wheels); both arguments broadcast."""
        d, cfg = self.design, self.cfg
        oil, gb, brg = cfg.oil, cfg.gearbox, cfg.bearing
        w = np.abs(np.asarray(omega_in, dtype=float))
        t = np.abs(np.asarray(torque_out, dtype=float))
        f = d.speed_factors(gear)
        rs = d.ratio_set
        t_counter = t / rs.gamma_fd
        t_in = t_counter / d.ratio(gear)
        active = str(gear)

        terms: dict[str, np.ndarray] = {}
        # mesh friction: the selected pair and the final drive carry load
        for key, geom in self.meshes.items():
            speed = w * f["pinion1" if key == "1" else "pinion2" if key == "2" else "pinion_fd"]
            if key != "fd" and key != active:  # idling pair: no load, no EHL friction
                terms[f"mesh_{key}"] = np.zeros(np.broadcast_shapes(speed.shape, t.shape))
                continue
            torque = t_counter if key == "fd" else t_in
            profile = self._profile(key, torque)
            terms[f"mesh_{key}"] = mesh_power(geom, speed, torque, oil, gb.surface_roughness, profile)

        for name, r, width, h, n, tip, root in self.bodies:
            speed = w * f[name]
            if h > 0:
                p_p, p_f, _ = churning_power(r, 0.0, width, speed, self.oil_fluid, h)
                p_c = cavity_power(tip, root, speed, self.oil_fluid.viscosity, h, n, oil.cavity_count,
                                   oil.cavity_angle, oil.cavity_d3, oil.cavity_d4)
                terms[f"churn_{name}"] = p_p + p_f + p_c
            else:  # dry body: every churning term vanishes identically
                terms[f"churn_{name}"] = np.zeros_like(speed)

        # windage of all bodies in one broadcast call, stacked along a leading axis
        lead = (len(self._air),) + (1,) * max(w.ndim, t.ndim)
        factors = np.array([f[a[1]] for a in self._air]).reshape(lead)
        wind = windage_power(self._air_r.reshape(lead), self._air_b.reshape(lead), factors * w, self.air_fluid,
                             self._air_h.reshape(lead))
        for (key, *_), p in zip(self._air, wind):
            terms[key] = p

        w_active = normal_load(self.meshes[active], t_in)
        w_fd = normal_load(self.meshes["fd"], t_counter)
        for k, (r, length, h) in enumerate(self.shafts):
            speed = w * f[f"shaft{k + 1}"]
            terms[f"shaft{k + 1}"] = (shaft_churning(r, length, speed, self.oil_fluid, h) if h > 0
                                      else np.zeros_like(speed))
        # two bearings per shaft share the shaft load
        lead3 = (3,) + (1,) * max(w.ndim, t.ndim)
        shaft_speed = np.array([f["shaft1"], f["shaft2"], f["shaft3"]]).reshape(lead3) * w
        shaft_load = _stack_aligned((w_active, w_active + w_fd, w_fd), len(lead3) - 1)
        bearings = 2.0 * bearing_losses(shaft_speed, 0.5 * shaft_load, brg, oil)[3]
        for k in range(3):
            terms[f"bearings{k + 1}"] = bearings[k]

        if d.n_gears == 2:
            # synchronizer hub turns with the counter shaft, the loose first gear with pinion 1
            raw = synchro_drag(w * f["synchro"], w * f["gear1"], self.sigma_syn)
            terms["synchro"] = np.maximum(raw, 0.0)
        return LossBreakdown(terms)

    def total(self, gear: int, omega_in, torque_out) -> np.ndarray:
        return self.evaluate(gear, omega_in, torque_out).total


@dataclass(frozen=True, eq=False)
class LossMap:
    """Total gearbox loss (W) on a uniform (input speed, output torque) grid.

    The drivetrain inertia term is not included; see :func:`total_gearbox_loss`.
    """

    gear: int
    speed: np.ndarray
    torque: np.ndarray
    loss: np.ndarray
    overall_ratio: float

    @property
    def resolution(self) -> tuple[int, int]:
        return self.loss.shape

    def interpolate(self, omega_in, torque_out) -> tuple[np.ndarray, int]:
        """``(loss, n_clamped)`` by bilinear interpolation; queries off the grid are clamped."""
        return bilinear(self.speed[0], self.speed[1] - self.speed[0], self.torque[0],
                        self.torque[1] - self.torque[0], self.loss, omega_in, torque_out)

    def efficiency(self) -> np.ndarray:
        """Output power over output power plus loss (NaN where no power flows)."""
        p_out = np.abs(self.torque)[None, :] * self.speed[:, None] / self.overall_ratio
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(p_out > 0, p_out / (p_out + self.loss), np.nan)


def torque_range(design: GearboxDesign, cfg: Config) -> float:
    """Half-width of the map torque axis: highest overall ratio times EM peak torque."""
    return design.overall_ratio(1) * cfg.em.max_torque


def build_loss_map(design: GearboxDesign, gear: int, cfg: Config, resolution=(200, 200),
                   model: GearboxLossModel | None = None) -> LossMap:
    n_w, n_t = resolution
    if n_w < 2 or n_t < 2:
        raise ValueError("loss map needs at least 2x2 nodes")
    model = model or GearboxLossModel(design, cfg)
    speed = np.linspace(0.0, cfg.em.max_speed, n_w)
    t_max = torque_range(design, cfg)
    torque = np.linspace(-t_max, t_max, n_t)
    loss = model.total(gear, speed[:, None], torque[None, :])
    loss = np.broadcast_to(loss, (n_w, n_t)).copy()
    if not np.all(np.isfinite(loss)) or np.any(loss < 0):
        raise ArithmeticError("loss map contains negative or non-finite values")
    loss.setflags(write=False)
    return LossMap(gear, speed, torque, loss, design.overall_ratio(gear))


def build_loss_maps(design: GearboxDesign, cfg: Config, resolution=(200, 200)) -> dict[int, LossMap]:
    model = GearboxLossModel(design, cfg)
    return {g: build_loss_map(design, g, cfg, resolution, model) for g in range(1, design.n_gears + 1)}


def interpolate_loss(lmap: LossMap, omega_in, torque_out) -> np.ndarray:
    return lmap.interpolate(omega_in, torque_out)[0]


def inertia_power(inertia: float, v, a, wheel_radius: float):
    """Power to spin up the rotating masses, ``J v a / r_w^2`` (J referred to the wheel)."""
    return inertia * np.asarray(v, float) * np.asarray(a, float) / wheel_radius**2


def total_gearbox_loss(lmap: LossMap, omega_in, torque_out, v, a, inertia: float, wheel_radius: float):
    """Interpolated loss plus the inertia term; negative values mean recovered kinetic energy."""
    return interpolate_loss(lmap, omega_in, torque_out) + inertia_power(inertia, v, a, wheel_radius)


def export_map_csv(lmap: LossMap, path: str | Path) -> None:
    eff = lmap.efficiency()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gear", "speed_rad_s", "torque_out_Nm", "loss_W", "efficiency"])
        for i, s in enumerate(lmap.speed):
            for j, t in enumerate(lmap.torque):
                e = eff[i, j]
                w.writerow([lmap.gear, repr(float(s)), repr(float(t)), repr(float(lmap.loss[i, j])),
                            "" if math.isnan(e) else repr(float(e))])
