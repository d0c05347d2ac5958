"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 unreadable or
malformed input files, 4 no feasible design / infeasible simulation,
5 internal error. Every option can also be set through an environment
variable ``EVTRANSMISSION_<OPTION>`` (e.g. ``EVTRANSMISSION_JOBS=8``).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import Config, ConfigError, RatioSet, config_hash, dump_config, load_config, validate_config
from .cycles import CycleError, DriveCycle, cadc_like, load_cycle_csv, nedc, synthetic_cycle
from .lossmap import build_loss_maps, export_map_csv
from .motor import get_map, save_map_csv
from .powertrain import evaluate_gear, export_trajectory_csv, simulate
from .report import PAPER_TABLE3, RunReport, cycle_hash
from .search import SearchError, best_design, feasible_counts, search
from .shifting import export_schedule_csv, optimize_shifts
from .synthesis import export_design_csv, synthesize

log = logging.getLogger("evtransmission")

EXIT_OK, EXIT_VALIDATION, EXIT_INGESTION, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 2, 3, 4, 5
ENV_PREFIX = "EVTRANSMISSION_"


class UsageError(ValueError):
    pass


class InfeasibleError(RuntimeError):
    pass


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        grid = int(a), int(b)
    except ValueError:
        raise UsageError(f"grid must look like 200x200, got {text!r}") from None
    if min(grid) < 2:
        raise UsageError("grid needs at least 2 nodes per axis")
    return grid


def parse_teeth(text: str) -> RatioSet:
    """``G1,FD`` (fixed gear) or ``G1,G2,FD`` (two gears)."""
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"teeth must be integers, got {text!r}") from None
    if len(parts) == 2:
        return RatioSet(parts[0], parts[1])
    if len(parts) == 3:
        return RatioSet(parts[0], parts[2], parts[1])
    raise UsageError("teeth must be G1,FD or G1,G2,FD")


def resolve_cycle(spec: str, dt: float | None) -> DriveCycle:
    """A CSV path or one of ``nedc``, ``cadc-like``, ``synthetic:N[:SEED]``."""
    name = spec.lower()
    step = 1.0 if dt is None else dt
    if name == "nedc":
        return nedc(step)
    if name in ("cadc", "cadc-like"):
        return cadc_like(step)
    if name.startswith("synthetic:"):
        parts = name.split(":")
        try:
            n, seed = int(parts[1]), int(parts[2]) if len(parts) > 2 else 0
        except (ValueError, IndexError):
            raise UsageError("synthetic cycle must be synthetic:N[:SEED]") from None
        return synthetic_cycle(n, seed, step)
    return load_cycle_csv(spec, dt)


def load_run_config(args) -> Config:
    cfg = load_config(args.config) if args.config else validate_config()
    if args.em_map:
        if not Path(args.em_map).is_file():
            raise CycleError(f"EM map not found: {args.em_map}")
        cfg = dataclasses.replace(cfg, em=dataclasses.replace(cfg.em, efficiency_map=str(args.em_map)))
        get_map(cfg.em)  # fail early on a malformed map
    return cfg


def _winner_dict(rs: RatioSet, mass: float, energy: float, n_shifts=None, battery=None) -> dict:
    d = {"teeth": list(rs.key()), "ratios": [r for r in rs.gear_ratios()] + [rs.gamma_fd],
         "mass_kg": mass, "energy_kwh": energy / 3.6e6 if math.isfinite(energy) else None, "n_shifts": n_shifts}
    if battery is not None:
        d["battery_energy_kwh"] = battery / 3.6e6
    return d


def _simulate_design(rs: RatioSet, cycle: DriveCycle, cfg: Config, grid, out: Path | None, validate=False,
                     schedule=None):
    """Synthesize, simulate (DP schedule for two gears unless one is given) and export."""
    design = synthesize(rs, cfg)
    maps = build_loss_maps(design, cfg, grid)
    plan = None
    if schedule is not None:
        result = simulate(design, cycle, schedule, maps, cfg)
    elif design.n_gears == 1:
        result = simulate(design, cycle, np.ones(len(cycle), dtype=int), maps, cfg)
    else:
        plan = optimize_shifts(design, cycle, maps, cfg)
        if plan.result is None:
            trajs = {g: evaluate_gear(design, g, cycle, maps[g], cfg) for g in (1, 2)}
            result = None
            bad = int(np.sum(~trajs[1].feasible & ~trajs[2].feasible))
            return design, maps, None, plan, {"samples_infeasible_in_both_gears": bad}
        result = plan.result
    diag = {"interpolation_clamps": result.n_clamped,
            "infeasible_samples": int(np.sum(~result.feasible_samples))}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        export_design_csv(design, out / "design.csv")
        for g, m in maps.items():
            export_map_csv(m, out / f"lossmap_gear{g}.csv")
        export_trajectory_csv(result, out / "trajectory.csv", validate=validate)
        if plan is not None:
            export_schedule_csv(plan, cycle, out / "schedule.csv")
    return design, maps, result, plan, diag


# ------------------------------------------------------------------ commands

def cmd_design(args) -> int:
    t0 = time.perf_counter()
    cfg = load_run_config(args)
    cycle = resolve_cycle(args.cycle, args.dt)
    grid = parse_grid(args.grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.yaml")
    gradeability = args.gradeability == "on"
    res = search(cycle, cfg, args.mode, grid, gradeability, args.accel_check, args.jobs,
                 out / "ranking.csv", args.resume)
    rep = RunReport("design", config_hash(cfg), cycle.name, cycle_hash(cycle), args.mode, grid, 0.0,
                    res.n_enumerated, res.n_feasible)
    pruned = [e for e in res.evaluations if not e.evaluated]
    rep.diagnostics = {
        "pruned_top_speed": sum(not e.feasibility.top_speed for e in pruned),
        "pruned_acceleration": sum(not e.feasibility.acceleration for e in pruned),
        "pruned_gradeability": sum(not e.feasibility.gradeability for e in pruned) if gradeability else 0,
        "evaluated_but_infeasible_in_simulation": sum(e.evaluated and not math.isfinite(e.energy)
                                                      for e in res.evaluations),
    }
    try:
        best = best_design(res)
    except SearchError:
        rep.wall_time_s = time.perf_counter() - t0
        rep.write(out)
        print(f"no feasible design; report in {out}", file=sys.stderr)
        return EXIT_INFEASIBLE
    g1, g2, fd = best.key
    rs = RatioSet(g1, fd, g2 or None, cfg.gearbox.teeth_per_pinion)
    _, _, result, plan, diag = _simulate_design(rs, cycle, cfg, grid, out / "winner")
    rep.diagnostics.update(diag)
    rep.winner = _winner_dict(rs, best.mass, best.energy, best.n_shifts)
    rep.comparison = _comparison(res)
    rep.wall_time_s = time.perf_counter() - t0
    rep.write(out)
    print((out / "report.txt").read_text(), end="")
    return EXIT_OK


def _comparison(res) -> list[dict]:
    by_key = {e.key: e for e in res.evaluations}
    rows = []
    for case, (key, kwh) in PAPER_TABLE3.items():
        ev = by_key.get(key)
        rows.append({"case": case, "teeth": list(key), "paper_kwh": kwh,
                     "energy_kwh": (ev.energy / 3.6e6) if ev is not None and math.isfinite(ev.energy) else None})
    return rows


def _read_schedule(path: str, n: int) -> np.ndarray:
    try:
        sched = np.loadtxt(path, delimiter=",", dtype=int, ndmin=1)
    except (OSError, ValueError) as exc:
        raise CycleError(f"cannot read schedule {path}: {exc}") from exc
    if sched.shape != (n,):
        raise CycleError(f"schedule has {sched.size} entries, cycle has {n}")
    return sched


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_run_config(args)
    cycle = resolve_cycle(args.cycle, args.dt)
    grid = parse_grid(args.grid)
    rs = parse_teeth(args.teeth)
    rs.validate(cfg.gearbox)
    out = Path(args.out)
    schedule = _read_schedule(args.schedule, len(cycle)) if args.schedule else None
    design, _, result, plan, diag = _simulate_design(rs, cycle, cfg, grid, out, args.validate, schedule)
    rep = RunReport("simulate", config_hash(cfg), cycle.name, cycle_hash(cycle), f"{design.n_gears}-gear", grid, 0.0)
    rep.diagnostics = diag
    if result is None or not result.feasible:
        energy = math.inf
    else:
        energy = result.energy
    rep.winner = _winner_dict(rs, design.mass, energy, None if plan is None else plan.n_shifts,
                              result.battery_energy() if (args.validate and result is not None) else None)
    rep.wall_time_s = time.perf_counter() - t0
    rep.write(out)
    print((out / "report.txt").read_text(), end="")
    return EXIT_OK if math.isfinite(energy) else EXIT_INFEASIBLE


def cmd_export_maps(args) -> int:
    cfg = load_run_config(args)
    grid = parse_grid(args.grid)
    rs = parse_teeth(args.teeth)
    rs.validate(cfg.gearbox)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    design = synthesize(rs, cfg)
    maps = build_loss_maps(design, cfg, grid)
    for g, m in maps.items():
        export_map_csv(m, out / f"lossmap_gear{g}.csv")
    save_map_csv(get_map(cfg.em), out / "em_map.csv")
    export_design_csv(design, out / "design.csv")
    if args.cycle:
        cycle = resolve_cycle(args.cycle, args.dt)
        with open(out / "operating_points.csv", "w") as fh:
            fh.write("t,gear,omega_m,torque_out_Nm,p_m_W\n")
            for g in maps:
                tr = evaluate_gear(design, g, cycle, maps[g], cfg)
                for k in range(len(cycle)):
                    fh.write(f"{cycle.t[k]!r},{g},{tr.omega[k]!r},{tr.torque_out[k]!r},{tr.p_m[k]!r}\n")
    print(f"maps written to {out}")
    return EXIT_OK


def cmd_feasible_counts(args) -> int:
    cfg = load_run_config(args)
    cycle = resolve_cycle(args.cycle, args.dt)
    counts = feasible_counts(cycle, cfg, args.gradeability == "on", args.accel_check)
    for mode, c in counts.items():
        print(f"{mode.upper()}: {c['feasible']} feasible of {c['enumerated']} (published: {c['paper']}, "
              f"ratio {c['ratio']:.2f})")
    return EXIT_OK


# ------------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=_env("config"), help="YAML configuration file")
    common.add_argument("--em-map", default=_env("em_map"), help="EM efficiency map CSV")
    common.add_argument("--dt", type=float, default=_env("dt"), help="sampling time in s")
    common.add_argument("--grid", default=_env("grid", "200x200"), help="loss-map resolution, e.g. 200x200")
    common.add_argument("--out", default=_env("out", "evtransmission-out"), help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="evtransmission", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", parents=[common], help="exhaustive transmission design search")
    d.add_argument("--mode", choices=["fgt", "2gt"], default=_env("mode", "fgt"))
    d.add_argument("--cycle", default=_env("cycle", "cadc-like"))
    d.add_argument("--gradeability", choices=["on", "off"], default=_env("gradeability", "on"))
    d.add_argument("--accel-check", choices=["sample", "joint"], default=_env("accel_check", "sample"))
    d.add_argument("--jobs", type=int, default=int(_env("jobs", os.cpu_count() or 1)))
    d.add_argument("--resume", action="store_true", default=_env("resume", "") in ("1", "true", "yes"))
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", parents=[common], help="simulate one design")
    s.add_argument("--teeth", required=True, help="G1,FD or G1,G2,FD driven-gear teeth")
    s.add_argument("--cycle", default=_env("cycle", "cadc-like"))
    s.add_argument("--schedule", help="CSV with one gear per cycle sample (default: optimal)")
    s.add_argument("--validate", action="store_true", help="also report battery energy via fixed chain efficiencies")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("export-maps", parents=[common], help="export loss/efficiency and EM maps")
    e.add_argument("--teeth", required=True)
    e.add_argument("--cycle", default=None, help="also export the cycle's operating points")
    e.set_defaults(func=cmd_export_maps)

    f = sub.add_parser("feasible-counts", parents=[common], help="feasible-set sizes after pruning")
    f.add_argument("--cycle", default=_env("cycle", "cadc-like"))
    f.add_argument("--gradeability", choices=["on", "off"], default=_env("gradeability", "on"))
    f.add_argument("--accel-check", choices=["sample", "joint"], default=_env("accel_check", "sample"))
    f.set_defaults(func=cmd_feasible_counts)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.dt is not None:
            args.dt = float(args.dt)
            if not args.dt > 0:
                raise UsageError("--dt must be positive")
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CycleError, OSError, yaml.YAMLError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except (SearchError, InfeasibleError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - last resort
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
