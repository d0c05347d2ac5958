"""Shift-event energy and dynamic-programming gear-shift optimization."""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import Config
from .cycles import DriveCycle
from .lossmap import LossMap
from .motor import EfficiencyMap
from .powertrain import GearTrajectory, SimResult, combine, evaluate_gear
from .synthesis import GearboxDesign


def actuator_energy(force: float, stroke: float, efficiency: float) -> float:
    """Energy of one engage/release actuation pair, ``2 F h / eta``."""
    if not 0 < efficiency <= 1:
        raise ValueError("actuator efficiency must lie in (0, 1]")
    return 2.0 * force * stroke / efficiency


def slip_duration(slip0, rate: float, tolerance: float):
    """Time for the exponentially decaying slip speed to reach ``tolerance``."""
    if not rate > 0:
        raise ValueError("slip decay rate must be positive")
    slip0 = np.abs(np.asarray(slip0, dtype=float))
    with np.errstate(divide="ignore"):
        dur = np.where(slip0 > tolerance, np.log(np.maximum(slip0, tolerance) / tolerance) / rate, 0.0)
    return float(dur) if dur.ndim == 0 else dur


def slip_trajectory(slip0: float, rate: float, tolerance: float, n: int = 50):
    """``(duration, t, slip)`` sampled on ``n`` points up to the synchronization time."""
    dur = slip_duration(slip0, rate, tolerance)
    t = np.linspace(0.0, dur, n)
    return dur, t, abs(slip0) * np.exp(-rate * t)


def slip_dissipation(torque, j1: float, j2: float, rate: float, slip0, horizon):
    """Closed-form integral of ``(T + J1 J2 rate w/(J1+J2)) w`` with ``w = slip0 exp(-rate t)``.

    Broadcasts over ``torque``, ``slip0`` and ``horizon``.
    """
    if not (j1 > 0 and j2 > 0):
        raise ValueError("inertias must be positive")
    if not rate > 0:
        raise ValueError("slip decay rate must be positive")
    slip0 = np.abs(np.asarray(slip0, dtype=float))
    horizon = np.asarray(horizon, dtype=float)
    j_eff = j1 * j2 / (j1 + j2)
    linear = np.abs(np.asarray(torque, dtype=float)) * slip0 * -np.expm1(-rate * horizon) / rate
    quad = j_eff * rate * slip0**2 * -np.expm1(-2.0 * rate * horizon) / (2.0 * rate)
    out = linear + quad
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ShiftModel:
    """Everything about a design that a shift event needs."""

    j1: float
    j2: float
    rate: float
    tolerance: float
    shift_time: float
    actuation: float  # clutch + synchronizer actuator energy per shift

    @classmethod
    def from_design(cls, design: GearboxDesign, cfg: Config) -> "ShiftModel":
        gb = cfg.gearbox
        e_cl = actuator_energy(design.clutch_force, gb.clutch_actuation_distance, gb.actuator_efficiency)
        e_syn = actuator_energy(gb.synchro_actuation_force, design.synchro_width / 2, gb.actuator_efficiency)
        return cls(design.j1, design.j2, gb.clutch_pressure_rate, gb.slip_tolerance, gb.shift_time, e_cl + e_syn)

    def horizon(self, slip0):
        out = np.minimum(slip_duration(slip0, self.rate, self.tolerance), self.shift_time)
        return float(out) if np.ndim(out) == 0 else out

    def energy(self, torque, slip0):
        """Shift energy (J); broadcasts over ``torque`` and ``slip0``."""
        return slip_dissipation(torque, self.j1, self.j2, self.rate, slip0, self.horizon(slip0)) + self.actuation


def shift_energy(torque: float, j1: float, j2: float, rate: float, slip0: float, actuation: float = 0.0,
                 tolerance: float = 1.0, shift_time: float = 0.5) -> float:
    """Energy (J) of one shift: clutch slip dissipation plus actuator energy."""
    return ShiftModel(j1, j2, rate, tolerance, shift_time, actuation).energy(torque, slip0)


@dataclass(frozen=True)
class ShiftEvent:
    index: int
    direction: int
    slip0: float
    duration: float
    energy: float
    within_shift_time: bool


@dataclass(frozen=True, eq=False)
class ShiftPlan:
    schedule: np.ndarray
    cost: float  # J
    events: tuple[ShiftEvent, ...]
    result: SimResult | None = None

    @property
    def n_shifts(self) -> int:
        return len(self.events)


def shift_cost_table(trajs: dict[int, GearTrajectory], model: ShiftModel):
    """Shift energy at every sample for 1->2 and 2->1, evaluated at the pre-shift point."""
    t1, t2 = trajs[1], trajs[2]
    slip = np.abs(t1.omega - t2.omega)
    return np.asarray(model.energy(t1.torque_m, slip)), np.asarray(model.energy(t2.torque_m, slip))


def dp_schedule(stage, shift, initial: int = 0):
    """Minimum-cost state sequence for two states.

    ``stage[k, i]`` is the cost of being in state ``i`` at sample ``k``
    (``inf`` if not allowed); ``shift[k, i]`` is the cost of leaving state ``i``
    after sample ``k``. Costs accumulate forward in time, so the objective is
    bit-identical to summing a sequence's costs in order. Ties go to fewer
    shifts, then to staying, then to the lower state.

    Returns ``(cost, states)``.
    """
    stage = np.asarray(stage, dtype=float)
    shift = np.asarray(shift, dtype=float)
    n = stage.shape[0]
    if n == 0:
        return 0.0, np.zeros(0, dtype=int)
    inf = math.inf
    s0, s1 = stage[:, 0].tolist(), stage[:, 1].tolist()
    h0, h1 = shift[:, 0].tolist(), shift[:, 1].tolist()
    # value at entry of sample k (before its stage cost) and the shift count behind it
    c0, c1 = (0.0, inf) if initial == 0 else (inf, 0.0)
    n0 = n1 = 0
    parent = bytearray(2 * n)  # parent[2k + i]: state at k-1 of the best path into state i at k
    for k in range(n - 1):
        a0, a1 = c0 + s0[k], c1 + s1[k]
        m0, m1 = a1 + h1[k], a0 + h0[k]  # move into 0 from 1, into 1 from 0
        if m0 < a0 or (m0 == a0 and n1 + 1 < n0):
            new0, k0, parent[2 * k + 2] = m0, n1 + 1, 1
        else:
            new0, k0, parent[2 * k + 2] = a0, n0, 0
        if m1 < a1 or (m1 == a1 and n0 + 1 < n1):
            new1, k1, parent[2 * k + 3] = m1, n0 + 1, 0
        else:
            new1, k1, parent[2 * k + 3] = a1, n1, 1
        c0, c1, n0, n1 = new0, new1, k0, k1
    cost, _, last = min((c0 + s0[-1], n0, 0), (c1 + s1[-1], n1, 1))
    states = np.empty(n, dtype=int)
    states[-1] = last
    for k in range(n - 1, 0, -1):
        states[k - 1] = parent[2 * k + states[k]]
    return cost, states


def brute_force_schedule(stage, shift, initial: int = 0):
    """Exhaustive reference for :func:`dp_schedule` (2**(n-1) sequences)."""
    stage = np.asarray(stage, dtype=float).tolist()
    shift = np.asarray(shift, dtype=float).tolist()
    n = len(stage)
    best = (math.inf, 0, ())
    for tail in itertools.product((0, 1), repeat=max(n - 1, 0)):
        seq = (initial,) + tail
        cost = 0.0
        for k, i in enumerate(seq):
            cost = cost + stage[k][i]
            if k + 1 < n and seq[k + 1] != i:
                cost = cost + shift[k][i]
        key = (cost, sum(a != b for a, b in zip(seq, seq[1:])), seq)
        best = min(best, key)
    return best[0], np.array(best[2], dtype=int)


def optimize_shifts(design: GearboxDesign, cycle: DriveCycle, maps: dict[int, LossMap], cfg: Config,
                    emap: EfficiencyMap | None = None, trajectories: dict[int, GearTrajectory] | None = None,
                    keep_result: bool = True) -> ShiftPlan:
    """Globally optimal gear schedule of a two-gear design (first gear at launch)."""
    if design.n_gears != 2:
        raise ValueError("shift optimization needs a two-gear design")
    trajs = trajectories or {g: evaluate_gear(design, g, cycle, maps[g], cfg, emap) for g in (1, 2)}
    model = ShiftModel.from_design(design, cfg)
    dt = cycle.dt
    stage = np.stack([np.where(trajs[g].feasible, trajs[g].p_ac * dt, np.inf) for g in (1, 2)], axis=1)
    up, down = shift_cost_table(trajs, model)
    cost, states = dp_schedule(stage, np.stack([up, down], axis=1))
    schedule = states + 1
    events = []
    slip = np.abs(trajs[1].omega - trajs[2].omega)
    for k in np.flatnonzero(np.diff(schedule)):
        direction = int(schedule[k + 1] - schedule[k])
        e = up[k] if direction > 0 else down[k]
        events.append(ShiftEvent(int(k), direction, float(slip[k]), model.horizon(slip[k]), float(e),
                                 slip_duration(slip[k], model.rate, model.tolerance) <= model.shift_time))
    result = None
    if keep_result and math.isfinite(cost):
        result = combine(cycle, trajs, schedule, sum(e.energy for e in events))
    return ShiftPlan(schedule, float(cost), tuple(events), result)


def export_schedule_csv(plan: ShiftPlan, cycle: DriveCycle, path: str | Path) -> None:
    by_index = {e.index: e for e in plan.events}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "gear", "shift", "slip0_rad_s", "shift_energy_J"])
        for k in range(len(cycle)):
            e = by_index.get(k)
            w.writerow([repr(float(cycle.t[k])), int(plan.schedule[k]), 0 if e is None else e.direction,
                        "" if e is None else repr(e.slip0), "" if e is None else repr(e.energy)])
