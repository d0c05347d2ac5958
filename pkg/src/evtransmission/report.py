"""Run reports: metadata, winner, Table-3-style comparison and diagnostics."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cycles import DriveCycle

# published energy consumption on the CADC, kWh (absolute values need the
# original EM map and are not expected to be reproduced)
PAPER_TABLE3 = {
    "FGT (baseline)": ((31, 0, 74), 8.48),
    "FGT (gradeability)": ((55, 0, 38), 8.30),
    "FGT (no gradeability)": ((46, 0, 31), 8.12),
    "2GT (optimized)": ((48, 20, 44), 8.23),
}


def cycle_hash(cycle: DriveCycle) -> str:
    h = hashlib.sha256()
    for arr in (cycle.t, cycle.v, cycle.a, cycle.beta):
        h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    h.update(repr(cycle.dt).encode())
    return h.hexdigest()[:16]


@dataclass
class RunReport:
    command: str
    config_hash: str
    cycle_name: str
    cycle_hash: str
    mode: str
    grid: tuple[int, int]
    wall_time_s: float
    n_enumerated: int = 0
    n_feasible: int = 0
    winner: dict | None = None
    comparison: list[dict] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default)

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json() + "\n")
        (out / "report.txt").write_text(render_text(self))


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(type(obj))


def _fmt_energy(kwh) -> str:
    return "infeasible" if kwh is None or not math.isfinite(kwh) else f"{kwh:.4f} kWh"


def render_text(rep: RunReport) -> str:
    lines = [
        f"evtransmission {rep.command} report",
        f"  config hash : {rep.config_hash}",
        f"  cycle       : {rep.cycle_name} ({rep.cycle_hash})",
        f"  mode        : {rep.mode}",
        f"  loss grid   : {rep.grid[0]}x{rep.grid[1]}",
        f"  wall time   : {rep.wall_time_s:.2f} s",
    ]
    if rep.n_enumerated:
        lines.append(f"  designs     : {rep.n_enumerated} enumerated, {rep.n_feasible} feasible after pruning")
    if rep.winner:
        w = rep.winner
        lines += ["", "Winner",
                  f"  teeth (g1, g2, fd) : {tuple(w['teeth'])}",
                  f"  ratios             : {', '.join(f'{r:.4f}' for r in w['ratios'])}",
                  f"  gearbox mass       : {w['mass_kg']:.2f} kg",
                  f"  E_ac               : {_fmt_energy(w.get('energy_kwh'))}"]
        if "battery_energy_kwh" in w:
            lines.append(f"  battery energy     : {_fmt_energy(w['battery_energy_kwh'])} (validation chain)")
        if w.get("n_shifts") is not None:
            lines.append(f"  shifts             : {w['n_shifts']}")
    if rep.comparison:
        lines += ["", "Comparison with the published results (CADC; absolute values are map dependent)",
                  f"  {'case':<24}{'teeth':<16}{'paper':>12}{'this run':>16}"]
        for row in rep.comparison:
            ours = _fmt_energy(row.get("energy_kwh"))
            lines.append(f"  {row['case']:<24}{str(tuple(row['teeth'])):<16}{row['paper_kwh']:>9.2f} kWh{ours:>16}")
    if rep.diagnostics:
        lines += ["", "Diagnostics"]
        for k, v in sorted(rep.diagnostics.items()):
            lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"
