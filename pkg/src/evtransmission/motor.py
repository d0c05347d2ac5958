"""Electric-machine efficiency map and torque envelope."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .config import EMParams
from .interp import bilinear

# loss-separation model, P_loss = c0 + c1*w + c2*T^2 + c3*w*|T|; peak efficiency ~0.954
SYNTHETIC_LOSS_COEFFS = (350.0, 0.6, 0.08, 0.03)
ETA_FLOOR = 0.5


@dataclass(frozen=True, eq=False)
class EfficiencyMap:
    """Efficiency over a uniform (speed, |torque|) grid plus the max-torque curve.

    The same efficiency is used for motoring and generating; queries use |T|.
    """

    speed: np.ndarray  # rad/s, uniform from 0
    torque: np.ndarray  # Nm, uniform from 0
    eta: np.ndarray  # shape (len(speed), len(torque)), values in (0, 1]
    max_torque: np.ndarray  # envelope at each speed node

    def __post_init__(self):
        if self.eta.shape != (len(self.speed), len(self.torque)):
            raise ValueError("eta grid shape does not match axes")
        if not np.all((self.eta > 0) & (self.eta <= 1)):
            raise ValueError("efficiency values must lie in (0, 1]")
        for name, ax in (("speed", self.speed), ("torque", self.torque)):
            step = np.diff(ax)
            if len(ax) < 2 or np.any(step <= 0) or not np.allclose(step, step[0], rtol=1e-6):
                raise ValueError(f"{name} axis must be uniform and increasing")

    @property
    def max_speed(self) -> float:
        return float(self.speed[-1])

    @property
    def peak_torque(self) -> float:
        return float(self.max_torque.max())

    @property
    def max_power(self) -> float:
        return float(np.max(self.max_torque * self.speed))

    def torque_limit(self, w):
        """Envelope torque at speed ``w`` (linear in speed, zero above max speed)."""
        w = np.asarray(w, dtype=float)
        lim = np.interp(w, self.speed, self.max_torque)
        return np.where(w > self.max_speed * (1 + 1e-12), 0.0, lim)

    def efficiency(self, torque, w):
        ds = self.speed[1] - self.speed[0]
        dT = self.torque[1] - self.torque[0]
        out, _ = bilinear(self.speed[0], ds, self.torque[0], dT, self.eta, w, np.abs(torque))
        return out

    def efficiency_from_power(self, power, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            torque = np.where(w > 0, np.asarray(power, float) / np.where(w > 0, w, 1.0), 0.0)
        return self.efficiency(torque, w)


def synthetic_map(em: EMParams, n_speed: int = 101, n_torque: int = 101,
                  coeffs=SYNTHETIC_LOSS_COEFFS) -> EfficiencyMap:
    speed = np.linspace(0.0, em.max_speed, n_speed)
    torque = np.linspace(0.0, em.max_torque, n_torque)
    W, T = np.meshgrid(speed, torque, indexing="ij")
    c0, c1, c2, c3 = coeffs
    p_mech = W * T
    p_loss = c0 + c1 * W + c2 * T**2 + c3 * W * T
    eta = np.maximum(p_mech / (p_mech + p_loss), ETA_FLOOR)
    with np.errstate(divide="ignore"):
        envelope = np.minimum(em.max_torque, np.where(speed > 0, em.rated_power / speed, np.inf))
    return EfficiencyMap(speed, torque, eta, envelope)


def save_map_csv(emap: EfficiencyMap, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["speed", "torque", "efficiency", "max_torque"])
        for i, s in enumerate(emap.speed):
            for j, t in enumerate(emap.torque):
                w.writerow([repr(float(s)), repr(float(t)), repr(float(emap.eta[i, j])),
                            repr(float(emap.max_torque[i]))])


def load_map_csv(path: str | Path) -> EfficiencyMap:
    """Read a long-form ``speed,torque,efficiency,max_torque`` table (rectangular grid)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 4:
        raise ValueError("EM map needs columns speed,torque,efficiency,max_torque")
    speed = np.unique(data[:, 0])
    torque = np.unique(data[:, 1])
    if len(data) != len(speed) * len(torque):
        raise ValueError("EM map is not a full rectangular grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    data = data[order]
    eta = data[:, 2].reshape(len(speed), len(torque))
    env = data[:, 3].reshape(len(speed), len(torque))[:, 0]
    return EfficiencyMap(speed, torque, eta, env)


@lru_cache(maxsize=8)
def _cached(em: EMParams) -> EfficiencyMap:
    if em.efficiency_map is None:
        return synthetic_map(em)
    return load_map_csv(em.efficiency_map)


def get_map(em: EMParams) -> EfficiencyMap:
    return _cached(em)


def max_power(em: EMParams) -> float:
    """Configured power limit, or the map envelope maximum of T*w."""
    return em.max_power if em.max_power is not None else get_map(em).max_power
