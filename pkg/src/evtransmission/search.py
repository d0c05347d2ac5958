"""Exhaustive search over the integer-teeth ratio grid."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .config import Config, RatioSet
from .cycles import DriveCycle
from .lossmap import build_loss_maps
from .motor import get_map
from .powertrain import evaluate_gear, simulate
from .shifting import optimize_shifts
from .synthesis import GearboxDesign, check_gradeability, synthesize

PAPER_FEASIBLE_COUNTS = {"fgt": 355, "2gt": 65820}


class SearchError(RuntimeError):
    """No feasible design (``kind='infeasible'``) or an empty grid."""


def teeth_axis(cfg: Config) -> list[int]:
    gb = cfg.gearbox
    n = gb.teeth_per_pinion
    lo = math.ceil(gb.ratio_min * n - 1e-9)
    hi = math.floor(gb.ratio_max * n + 1e-9)
    return list(range(lo, hi + 1))


def enumerate_designs(cfg: Config, mode: str) -> list[RatioSet]:
    """All teeth combinations in bounds; two-gear sets satisfy gamma1 > gamma2."""
    axis = teeth_axis(cfg)
    n = cfg.gearbox.teeth_per_pinion
    if not axis:
        raise SearchError("empty ratio grid")
    if mode == "fgt":
        return [RatioSet(g1, fd, None, n) for g1 in axis for fd in axis]
    if mode == "2gt":
        return [RatioSet(g1, fd, g2, n) for g1 in axis for g2 in axis if g2 < g1 for fd in axis]
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Feasibility:
    top_speed: bool
    acceleration: bool
    gradeability: bool

    def ok(self, use_gradeability: bool = True) -> bool:
        return self.top_speed and self.acceleration and (self.gradeability or not use_gradeability)


@dataclass(frozen=True)
class CycleDemand:
    """The cycle statistics the pruner needs."""

    v_max: float
    a_max: float
    v_peak_force: float  # speed at the sample of maximum demanded tractive force
    a_peak_force: float
    beta_peak_force: float

    @classmethod
    def from_cycle(cls, cycle: DriveCycle, cfg: Config) -> "CycleDemand":
        if len(cycle) == 0:
            return cls(0.0, 0.0, 0.0, 0.0, 0.0)
        veh = cfg.vehicle
        # the ranking of samples by force does not depend on the (constant) gearbox mass
        force = veh.mass * (veh.gravity * (veh.rolling_coeff * np.cos(cycle.beta) + np.sin(cycle.beta)) + cycle.a)
        force = force + 0.5 * veh.air_density * veh.drag_coeff * veh.frontal_area * cycle.v**2
        k = int(np.argmax(force))
        return cls(cycle.v_max, cycle.a_max, float(cycle.v[k]), float(cycle.a[k]), float(cycle.beta[k]))


def check_design(rs: RatioSet, mass: float, demand: CycleDemand, cfg: Config, accel_check: str = "sample"):
    """Top speed, acceleration and gradeability checks of one ratio set."""
    veh, em = cfg.vehicle, cfg.em
    emap = get_map(em)
    lowest = min(rs.gear_ratios()) * rs.gamma_fd
    highest = max(rs.gear_ratios()) * rs.gamma_fd
    top = lowest * demand.v_max / veh.wheel_radius <= em.max_speed * (1 + 1e-12)
    m = veh.mass + mass
    if accel_check == "sample":
        v, a, beta = demand.v_peak_force, demand.a_peak_force, demand.beta_peak_force
        need = m * (veh.gravity * (veh.rolling_coeff * math.cos(beta) + math.sin(beta)) + a)
        need += 0.5 * veh.air_density * veh.drag_coeff * veh.frontal_area * v**2
    elif accel_check == "joint":
        v, a = demand.v_max, demand.a_max
        need = m * (veh.gravity * veh.rolling_coeff + a)
    else:
        raise ValueError("accel_check must be 'sample' or 'joint'")
    w = highest * v / veh.wheel_radius
    available = highest * float(emap.torque_limit(w)) / veh.wheel_radius if w <= em.max_speed else 0.0
    accel = available >= need
    grade, _ = check_gradeability(rs, cfg)
    return Feasibility(bool(top), bool(accel), bool(grade))


def prune_infeasible(designs: Iterable[RatioSet], cycle: DriveCycle, cfg: Config, gradeability: bool = True,
                     accel_check: str = "sample") -> list[RatioSet]:
    demand = CycleDemand.from_cycle(cycle, cfg)
    keep = []
    for rs in designs:
        if check_design(rs, synthesize(rs, cfg).mass, demand, cfg, accel_check).ok(gradeability):
            keep.append(rs)
    return keep


def feasible_counts(cycle: DriveCycle, cfg: Config, gradeability: bool = True, accel_check: str = "sample",
                    modes=("fgt", "2gt")) -> dict[str, dict]:
    """Feasible-set sizes next to the published ones."""
    out = {}
    for mode in modes:
        designs = enumerate_designs(cfg, mode)
        n = len(prune_infeasible(designs, cycle, cfg, gradeability, accel_check))
        ref = PAPER_FEASIBLE_COUNTS[mode]
        out[mode] = {"enumerated": len(designs), "feasible": n, "paper": ref, "ratio": n / ref}
    return out


# ------------------------------------------------------------------ evaluation

@dataclass(frozen=True)
class Evaluation:
    key: tuple[int, int, int]
    energy: float  # J, inf when infeasible
    feasibility: Feasibility
    evaluated: bool
    mass: float
    n_shifts: int = 0

    @property
    def rank_key(self):
        return (self.energy, self.key)


def evaluate_design(rs: RatioSet, cycle: DriveCycle, cfg: Config, resolution=(200, 200), gradeability: bool = True,
                    accel_check: str = "sample", demand: CycleDemand | None = None) -> Evaluation:
    """Prune, then synthesize -> loss maps -> simulate (FGT) or optimize shifts (2GT)."""
    demand = demand or CycleDemand.from_cycle(cycle, cfg)
    design = synthesize(rs, cfg)
    feas = check_design(rs, design.mass, demand, cfg, accel_check)
    if not feas.ok(gradeability):
        return Evaluation(rs.key(), math.inf, feas, False, design.mass)
    energy, shifts = design_energy(design, cycle, cfg, resolution)
    return Evaluation(rs.key(), energy, feas, True, design.mass, shifts)


def design_energy(design: GearboxDesign, cycle: DriveCycle, cfg: Config, resolution=(200, 200)) -> tuple[float, int]:
    maps = build_loss_maps(design, cfg, resolution)
    if design.n_gears == 1:
        res = simulate(design, cycle, np.ones(len(cycle), dtype=int), maps, cfg)
        return res.energy, 0
    trajs = {g: evaluate_gear(design, g, cycle, maps[g], cfg) for g in (1, 2)}
    plan = optimize_shifts(design, cycle, maps, cfg, trajectories=trajs, keep_result=False)
    return plan.cost, plan.n_shifts


_WORKER: dict = {}


def _init_worker(cycle, cfg, resolution, gradeability, accel_check):
    _WORKER.update(cycle=cycle, cfg=cfg, resolution=resolution, gradeability=gradeability, accel_check=accel_check,
                   demand=CycleDemand.from_cycle(cycle, cfg))


def _evaluate_chunk(chunk: list[RatioSet]) -> list[Evaluation]:
    w = _WORKER
    return [evaluate_design(rs, w["cycle"], w["cfg"], w["resolution"], w["gradeability"], w["accel_check"],
                            w["demand"]) for rs in chunk]


RANKING_HEADER = ["teeth_g1", "teeth_g2", "teeth_fd", "gamma1", "gamma2", "gamma_fd", "mass_kg",
                  "top_speed_ok", "acceleration_ok", "gradeability_ok", "evaluated", "n_shifts", "E_ac_J", "E_ac_kWh"]


def _row(ev: Evaluation, n_t: int) -> list:
    g1, g2, fd = ev.key
    f = ev.feasibility
    return [g1, g2 or "", fd, repr(g1 / n_t), repr(g2 / n_t) if g2 else "", repr(fd / n_t), repr(ev.mass),
            int(f.top_speed), int(f.acceleration), int(f.gradeability), int(ev.evaluated), ev.n_shifts,
            repr(ev.energy), repr(ev.energy / 3.6e6)]


def _parse_row(row: dict) -> Evaluation:
    g2 = int(row["teeth_g2"]) if row["teeth_g2"] else 0
    feas = Feasibility(row["top_speed_ok"] == "1", row["acceleration_ok"] == "1", row["gradeability_ok"] == "1")
    return Evaluation((int(row["teeth_g1"]), g2, int(row["teeth_fd"])), float(row["E_ac_J"]), feas,
                      row["evaluated"] == "1", float(row["mass_kg"]), int(row["n_shifts"]))


def read_ranking(path: str | Path) -> list[Evaluation]:
    with open(path, newline="") as fh:
        return [_parse_row(r) for r in csv.DictReader(fh)]


@dataclass(frozen=True, eq=False)
class SearchResult:
    mode: str
    evaluations: tuple[Evaluation, ...]  # sorted by (energy, teeth key)
    n_enumerated: int

    @property
    def best(self) -> Evaluation:
        return self.evaluations[0]

    @property
    def n_feasible(self) -> int:
        return sum(e.evaluated for e in self.evaluations)

    @property
    def n_simulated_feasible(self) -> int:
        return sum(math.isfinite(e.energy) for e in self.evaluations)


def _chunks(items: list, size: int) -> Iterator[list]:
    for i in range(0, len(items), size):
        yield items[i:i + size]


def search(cycle: DriveCycle, cfg: Config, mode: str = "fgt", resolution=(200, 200), gradeability: bool = True,
           accel_check: str = "sample", jobs: int = 1, ranking_path: str | Path | None = None,
           resume: bool = False, designs: list[RatioSet] | None = None, chunk_size: int = 64,
           progress=None) -> SearchResult:
    """Evaluate every design of the grid and return them ranked.

    The ranking file is appended in enumeration order while the sweep runs
    (so it can be resumed) and rewritten sorted by energy at the end. Results
    do not depend on ``jobs``: each evaluation is a pure function of its
    inputs and the final ordering uses the teeth tuple as tie-break.
    """
    designs = enumerate_designs(cfg, mode) if designs is None else list(designs)
    n_t = cfg.gearbox.teeth_per_pinion
    done: dict[tuple, Evaluation] = {}
    if ranking_path is not None and resume and Path(ranking_path).exists():
        for ev in read_ranking(ranking_path):
            done[ev.key] = ev
    todo = [rs for rs in designs if rs.key() not in done]

    fh = writer = None
    if ranking_path is not None:
        fresh = not (resume and Path(ranking_path).exists())
        fh = open(ranking_path, "w" if fresh else "a", newline="")
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(RANKING_HEADER)
    try:
        chunks = list(_chunks(todo, chunk_size))
        if jobs > 1 and len(chunks) > 1:
            ex = ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                     initargs=(cycle, cfg, resolution, gradeability, accel_check))
            results = ex.map(_evaluate_chunk, chunks)
        else:
            ex = None
            _init_worker(cycle, cfg, resolution, gradeability, accel_check)
            results = map(_evaluate_chunk, chunks)
        try:
            for n, chunk_res in enumerate(results, 1):
                for ev in chunk_res:
                    done[ev.key] = ev
                    if writer:
                        writer.writerow(_row(ev, n_t))
                if fh:
                    fh.flush()
                if progress:
                    progress(n, len(chunks))
        finally:
            if ex is not None:
                ex.shutdown()
    finally:
        if fh:
            fh.close()

    wanted = {rs.key() for rs in designs}
    ranked = sorted((done[k] for k in wanted), key=lambda e: e.rank_key)
    if ranking_path is not None:
        write_ranking(ranked, ranking_path, n_t)
    return SearchResult(mode, tuple(ranked), len(designs))


def write_ranking(ranked: Iterable[Evaluation], path: str | Path, n_t: int = 17) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RANKING_HEADER)
        for ev in ranked:
            w.writerow(_row(ev, n_t))
    os.replace(tmp, path)


def best_design(result: SearchResult) -> Evaluation:
    best = result.best
    if not math.isfinite(best.energy):
        raise SearchError("no feasible design")
    return best
