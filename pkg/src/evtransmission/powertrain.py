"""Quasi-static (backward-facing) vehicle simulation over a drive cycle."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Config, VehicleParams
from .cycles import DriveCycle
from .lossmap import LossMap, inertia_power
from .motor import EfficiencyMap, get_map, max_power
from .synthesis import GearboxDesign

# fixed chain efficiencies of the validation-report mode
BATTERY_EFFICIENCY = 0.975
INVERTER_EFFICIENCY = 0.95


def road_load(v, a, beta, veh: VehicleParams, gearbox_mass: float = 0.0):
    """Power (W) requested at the wheels."""
    v = np.asarray(v, dtype=float)
    beta = np.asarray(beta, dtype=float)
    mass = veh.mass + gearbox_mass
    aero = 0.5 * veh.air_density * veh.drag_coeff * veh.frontal_area * v**3
    return aero + v * mass * (veh.gravity * (veh.rolling_coeff * np.cos(beta) + np.sin(beta)) + np.asarray(a, float))


def em_power(p_req, p_loss, p_max: float, regen_fraction: float):
    """EM mechanical power: motoring adds the gearbox loss; braking recovers the
    regenerative share of the request, saturated at ``-p_max``."""
    p_req = np.asarray(p_req, dtype=float)
    p_loss = np.asarray(p_loss, dtype=float)
    return np.where(p_req >= 0, p_req + p_loss, np.maximum(-p_max, regen_fraction * p_req + p_loss))


def em_electrical(p_m, omega, emap: EfficiencyMap):
    """Electrical power drawn (positive) or returned (negative) by the EM."""
    p_m = np.asarray(p_m, dtype=float)
    eta = emap.efficiency_from_power(p_m, omega)
    return np.where(p_m >= 0, p_m / eta, eta * p_m)


def validation_chain(p_ac):
    """Battery-terminal power with fixed inverter and battery efficiencies."""
    p_ac = np.asarray(p_ac, dtype=float)
    eta = BATTERY_EFFICIENCY * INVERTER_EFFICIENCY
    return np.where(p_ac >= 0, p_ac / eta, p_ac * eta)


@dataclass(frozen=True, eq=False)
class GearTrajectory:
    """Every sample of a cycle evaluated in one fixed gear."""

    gear: int
    omega: np.ndarray
    torque_out: np.ndarray
    p_req: np.ndarray
    p_loss: np.ndarray
    p_m: np.ndarray
    torque_m: np.ndarray
    p_ac: np.ndarray
    feasible: np.ndarray
    n_clamped: int


def evaluate_gear(design: GearboxDesign, gear: int, cycle: DriveCycle, lmap: LossMap, cfg: Config,
                  emap: EfficiencyMap | None = None) -> GearTrajectory:
    veh, em = cfg.vehicle, cfg.em
    emap = emap or get_map(em)
    p_max = max_power(em)
    v, a = cycle.v, cycle.a
    omega = design.overall_ratio(gear) * v / veh.wheel_radius
    p_req = road_load(v, a, cycle.beta, veh, design.mass)
    # torque the gearbox actually carries: braking beyond the regenerative share goes to the friction brakes
    p_gb = np.where(p_req >= 0, p_req, veh.regen_fraction * p_req)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_out = np.where(v > 0, p_gb * veh.wheel_radius / np.where(v > 0, v, 1.0), 0.0)
    loss, n_clamped = lmap.interpolate(omega, t_out)
    loss = loss + inertia_power(design.drivetrain_inertia(gear), v, a, veh.wheel_radius)
    p_m = em_power(p_req, loss, p_max, veh.regen_fraction)
    t_lim = emap.torque_limit(omega)
    # generating torque beyond the envelope is likewise left to the brakes
    p_m = np.where(p_m < 0, np.maximum(p_m, -t_lim * omega), p_m)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_m = np.where(omega > 0, p_m / np.where(omega > 0, omega, 1.0), 0.0)
    tol = 1e-9
    feasible = (omega <= em.max_speed * (1 + tol)) & (p_m <= p_max * (1 + tol)) & (
        (p_m <= 0) | ((omega > 0) & (t_m <= t_lim * (1 + tol))))
    p_ac = em_electrical(p_m, omega, emap)
    return GearTrajectory(gear, omega, t_out, p_req, loss, p_m, t_m, p_ac, feasible, n_clamped)


@dataclass(frozen=True, eq=False)
class SimResult:
    cycle: DriveCycle
    gear: np.ndarray
    omega: np.ndarray
    p_req: np.ndarray
    p_loss: np.ndarray
    p_m: np.ndarray
    torque_m: np.ndarray
    p_ac: np.ndarray
    feasible_samples: np.ndarray
    shift_energy: float
    n_clamped: int

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.feasible_samples))

    @property
    def energy(self) -> float:
        """E_ac in J (infinite when any sample is infeasible)."""
        if not self.feasible:
            return float("inf")
        return float(np.sum(self.p_ac) * self.cycle.dt + self.shift_energy)

    @property
    def energy_kwh(self) -> float:
        return self.energy / 3.6e6

    def battery_energy(self) -> float:
        """Validation mode: energy at the battery terminals, J."""
        return float(np.sum(validation_chain(self.p_ac)) * self.cycle.dt + self.shift_energy)

    @property
    def n_shifts(self) -> int:
        return int(np.count_nonzero(np.diff(self.gear)))


def combine(cycle: DriveCycle, trajectories: dict[int, GearTrajectory], schedule,
            shift_energy: float = 0.0) -> SimResult:
    gear = np.asarray(schedule, dtype=int)
    if gear.shape != (len(cycle),):
        raise ValueError("schedule length must equal cycle length")
    if not set(np.unique(gear)) <= set(trajectories):
        raise ValueError("schedule uses a gear without a loss map")

    def pick(field):
        out = np.empty(len(cycle), dtype=getattr(next(iter(trajectories.values())), field).dtype)
        for g, tr in trajectories.items():
            sel = gear == g
            out[sel] = getattr(tr, field)[sel]
        return out

    return SimResult(cycle, gear, pick("omega"), pick("p_req"), pick("p_loss"), pick("p_m"), pick("torque_m"),
                     pick("p_ac"), pick("feasible"), float(shift_energy),
                     sum(tr.n_clamped for tr in trajectories.values()))


def simulate(design: GearboxDesign, cycle: DriveCycle, schedule, maps: dict[int, LossMap], cfg: Config,
             shift_energy: float = 0.0, emap: EfficiencyMap | None = None) -> SimResult:
    """Simulate ``design`` following ``schedule`` (one gear per sample).

    ``shift_energy`` is the total shift-event energy of the schedule, supplied
    by :mod:`evtransmission.shifting`.
    """
    used = sorted(set(int(g) for g in np.unique(np.asarray(schedule))))
    trajs = {g: evaluate_gear(design, g, cycle, maps[g], cfg, emap) for g in used}
    return combine(cycle, trajs, schedule, shift_energy)


def export_trajectory_csv(result: SimResult, path: str | Path, validate: bool = False) -> None:
    cyc = result.cycle
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t", "v", "a", "beta", "gear", "omega_m", "p_req_W", "p_gb_loss_W", "p_m_W", "p_ac_W",
                  "feasible"]
        if validate:
            header.append("p_batt_W")
        w.writerow(header)
        p_batt = validation_chain(result.p_ac)
        for k in range(len(cyc)):
            row = [repr(float(x)) for x in (cyc.t[k], cyc.v[k], cyc.a[k], cyc.beta[k])]
            row.append(int(result.gear[k]))
            row += [repr(float(x)) for x in (result.omega[k], result.p_req[k], result.p_loss[k], result.p_m[k],
                                             result.p_ac[k])]
            row.append(int(result.feasible_samples[k]))
            if validate:
                row.append(repr(float(p_batt[k])))
            w.writerow(row)
