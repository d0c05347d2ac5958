"""Drive cycles: CSV ingestion, the NEDC, and synthetic missions."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KMH = 1.0 / 3.6


class CycleError(ValueError):
    """Malformed drive-cycle input; ``line`` is the 1-based CSV line, if known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True, eq=False)
class DriveCycle:
    """Uniformly sampled mission. Acceleration is the forward difference of
    speed unless it was ingested explicitly."""

    t: np.ndarray
    v: np.ndarray
    a: np.ndarray
    beta: np.ndarray
    dt: float
    name: str = "cycle"

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def from_speed(cls, v, dt: float = 1.0, beta=None, name: str = "cycle") -> "DriveCycle":
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise CycleError("negative speed")
        a = np.zeros_like(v)
        if len(v) > 1:
            a[:-1] = np.diff(v) / dt
        beta = np.zeros_like(v) if beta is None else np.broadcast_to(np.asarray(beta, float), v.shape).copy()
        return cls(np.arange(len(v)) * dt, v, a, beta, float(dt), name)

    def slice(self, start: int, stop: int) -> "DriveCycle":
        s = np.s_[start:stop]
        return DriveCycle(self.t[s], self.v[s], self.a[s], self.beta[s], self.dt, self.name)

    @property
    def distance(self) -> float:
        return float(np.sum(self.v) * self.dt)

    @property
    def v_max(self) -> float:
        return float(self.v.max()) if len(self) else 0.0

    @property
    def a_max(self) -> float:
        return float(self.a.max()) if len(self) else 0.0


def load_cycle_csv(path: str | Path, dt: float | None = None) -> DriveCycle:
    """Read ``t,v[,a][,beta]`` (SI units, uniform time step)."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CycleError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise CycleError("empty file", 1) from None
        if header[:2] != ["t", "v"] or not set(header[2:]) <= {"a", "beta"}:
            raise CycleError(f"header must be t,v[,a][,beta], got {','.join(header)}", 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CycleError(f"expected {len(header)} columns, got {len(row)}", lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise CycleError(f"non-numeric value in {row}", lineno) from None
            if not np.all(np.isfinite(vals)):
                raise CycleError("non-finite value", lineno)
            if vals[1] < 0:
                raise CycleError("negative speed", lineno)
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    cols = dict(zip(header, data.T))
    t = cols["t"]
    if len(t) > 1:
        steps = np.diff(t)
        step = float(steps[0]) if dt is None else dt
        if step <= 0 or not np.allclose(steps, step, rtol=1e-6, atol=1e-9):
            bad = int(np.argmax(~np.isclose(steps, step, rtol=1e-6, atol=1e-9))) + 3
            raise CycleError("non-uniform time step", bad)
    else:
        step = 1.0 if dt is None else dt
    cyc = DriveCycle.from_speed(cols["v"], step, cols.get("beta"), name=path.stem)
    a = cols["a"] if "a" in cols else cyc.a
    return DriveCycle(t - (t[0] if len(t) else 0.0), cyc.v, np.asarray(a, float), cyc.beta, step, path.stem)


def save_cycle_csv(cycle: DriveCycle, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "v", "a", "beta"])
        for row in zip(cycle.t, cycle.v, cycle.a, cycle.beta):
            w.writerow([repr(float(x)) for x in row])


def _from_knots(knots, dt: float, name: str) -> DriveCycle:
    """Piecewise-linear speed profile through ``(time_s, speed_kmh)`` knots."""
    kt, kv = np.array(knots, dtype=float).T
    t = np.arange(0.0, kt[-1] + dt / 2, dt)
    return DriveCycle.from_speed(np.interp(t, kt, kv) * KMH, dt, name=name)


def _segments_to_knots(segments):
    # (duration_s, end_speed_kmh) legs starting from rest at t=0
    knots, t, v = [(0.0, 0.0)], 0.0, 0.0
    for dur, v_end in segments:
        t += dur
        v = v_end
        knots.append((t, v))
    return knots


_ECE15 = [
    (11, 0), (4, 15), (8, 15), (2, 10), (3, 0), (21, 0),
    (5, 15), (2, 15), (5, 32), (24, 32), (8, 10), (3, 0), (21, 0),
    (5, 15), (2, 15), (9, 35), (2, 35), (8, 50), (12, 50), (8, 35), (13, 35),
    (2, 35), (7, 10), (3, 0), (7, 0),
]
_EUDC = [
    (20, 0), (5, 15), (2, 15), (9, 35), (2, 35), (8, 50), (2, 50), (13, 70),
    (50, 70), (8, 50), (69, 50), (13, 70), (50, 70), (35, 100), (30, 100),
    (20, 120), (10, 120), (16, 80), (8, 50), (10, 0), (20, 0),
]


def nedc(dt: float = 1.0) -> DriveCycle:
    """New European Driving Cycle: four ECE-15 urban blocks and one EUDC."""
    return _from_knots(_segments_to_knots(_ECE15 * 4 + _EUDC), dt, "NEDC")


# Legs chosen to reproduce the published phase durations (993 / 1082 / 1068 s)
# and peak speeds (57.7 / 111.5 / 131.4 km/h) of the Artemis cycles; the
# micro-trip shapes are approximations, not the measured trace.
_ART_URBAN = [
    (12, 0), (4, 25), (12, 22), (6, 0), (18, 0), (6, 32), (23, 35), (12, 20), (8, 0),
    (25, 0), (5, 14), (6, 8), (6, 0), (14, 0), (10, 38), (25, 45), (15, 30), (10, 0),
    (30, 0), (12, 50), (30, 57.7), (20, 40), (10, 45), (14, 0), (20, 0), (6, 16),
    (8, 10), (10, 28), (15, 25), (8, 0), (40, 0), (9, 35), (30, 42), (25, 30), (9, 0),
    (22, 0), (7, 24), (14, 20), (8, 0), (35, 0), (11, 48), (35, 52), (20, 35), (12, 0),
    (18, 0), (6, 20), (9, 12), (7, 0), (24, 0), (8, 30), (40, 36), (12, 0),
    (28, 0), (10, 40), (25, 44), (11, 0), (24, 0),
    (10, 30), (50, 32), (10, 0), (24, 0),
]
_ART_RURAL = [
    (10, 0), (14, 55), (30, 70), (40, 78), (20, 60), (30, 75), (60, 90), (25, 80),
    (15, 50), (20, 65), (30, 85), (45, 95), (30, 88), (25, 70), (18, 40), (12, 0),
    (20, 0), (16, 60), (25, 82), (60, 100), (30, 111.5), (40, 105), (30, 92),
    (25, 78), (35, 90), (50, 98), (40, 85), (30, 70), (35, 60), (30, 75),
    (40, 88), (35, 80), (25, 55), (20, 30), (12, 0), (18, 0),
    (10, 40), (21, 45), (11, 0),
]
_ART_MOTORWAY = [
    (10, 0), (15, 50), (20, 80), (35, 100), (60, 115), (60, 120), (40, 110),
    (60, 125), (80, 128), (60, 131.4), (80, 126), (50, 118), (60, 124), (70, 130),
    (60, 122), (40, 105), (40, 112), (50, 120), (40, 100), (30, 80), (40, 90),
    (30, 60), (20, 30), (12, 0), (6, 0),
]


def cadc_like(dt: float = 1.0) -> DriveCycle:
    """Synthetic Common-Artemis-style mission (urban, rural, motorway-130)."""
    legs = _ART_URBAN + _ART_RURAL + _ART_MOTORWAY
    return _from_knots(_segments_to_knots(legs), dt, "CADC-like")


def synthetic_cycle(n: int, seed: int = 0, dt: float = 1.0, v_peak: float = 30.0) -> DriveCycle:
    """Smooth random stop-and-go trace of ``n`` samples, deterministic in ``seed``.

    Acceleration tapers with speed like a power-limited driver (about
    ``12/(v + 5)`` m/s^2), so the trace stays within a mid-size EV's envelope.
    """
    rng = np.random.default_rng(seed)
    v = np.zeros(n)
    target, k = 0.0, 0
    while k < n:
        hold = int(rng.integers(10, 60))
        target = 0.0 if target > 0 and rng.random() < 0.3 else float(rng.uniform(3.0, v_peak))
        accel = float(rng.uniform(0.3, 1.2)) * dt
        for _ in range(hold):
            if k >= n:
                break
            prev = v[k - 1] if k else 0.0
            v[k] = prev + np.clip(target - prev, -1.3 * accel, min(accel, 12.0 * dt / (prev + 5.0)))
            k += 1
    return DriveCycle.from_speed(np.maximum(v, 0.0), dt, name=f"synthetic-{n}-{seed}")
