"""Whole-gearbox loss evaluation and the tabulated loss maps."""
from __future__ import annotations

import csv

import numpy as np
import pytest

from evtransmission.config import RatioSet
from evtransmission.lossmap import (
    GearboxLossModel, build_loss_map, build_loss_maps, export_map_csv, inertia_power, interpolate_loss,
    torque_range, total_gearbox_loss,
)
from evtransmission.synthesis import synthesize


def test_map_axes_and_nodes(tgt, tgt_model, tgt_maps, cfg):
    lmap = tgt_maps[1]
    assert lmap.resolution == (60, 60)
    assert lmap.speed[0] == 0.0 and lmap.speed[-1] == cfg.em.max_speed
    assert np.isclose(lmap.torque[-1], torque_range(tgt, cfg)) and np.isclose(lmap.torque[0], -lmap.torque[-1])
    # interpolation is exact at every node
    W, T = np.meshgrid(lmap.speed, lmap.torque, indexing="ij")
    assert np.allclose(interpolate_loss(lmap, W, T), lmap.loss, rtol=1e-13, atol=1e-9)
    i, j = 17, 41
    assert np.isclose(lmap.loss[i, j], tgt_model.total(1, lmap.speed[i], lmap.torque[j]), rtol=1e-12)


def test_maps_are_read_only_and_nonnegative(tgt_maps, fgt_maps):
    for maps in (tgt_maps, fgt_maps):
        for lmap in maps.values():
            assert np.all(lmap.loss >= 0)
            with pytest.raises(ValueError):
                lmap.loss[0, 0] = 1.0


def test_zero_speed_column_is_zero(tgt_maps, fgt_maps):
    for maps in (tgt_maps, fgt_maps):
        for lmap in maps.values():
            assert np.all(lmap.loss[0] == 0.0)


def test_regen_mirrors_motoring(tgt_maps):
    lmap = tgt_maps[2]
    assert np.allclose(lmap.loss, lmap.loss[:, ::-1], rtol=1e-12)


def test_breakdown_sums_to_total(tgt_model):
    w = np.linspace(0, 1000, 7)[:, None]
    t = np.linspace(-600, 600, 5)[None, :]
    for gear in (1, 2):
        bd = tgt_model.evaluate(gear, w, t)
        parts = sum(bd.group(p) for p in ("mesh", "churn", "windage", "shaft", "bearings", "clutch", "synchro"))
        assert np.allclose(parts, bd.total, rtol=1e-14)
        assert all(np.all(v >= 0) for v in bd.terms.values())
    # idle pair carries no mesh friction
    assert np.all(tgt_model.evaluate(1, w, t).terms["mesh_2"] == 0.0)
    assert np.all(tgt_model.evaluate(2, w, t).terms["mesh_1"] == 0.0)


def test_loss_grows_with_load_and_speed(fgt_maps):
    loss = fgt_maps[1].loss
    mid = loss.shape[1] // 2
    assert np.all(np.diff(loss[1:, -1]) > 0)
    assert np.all(np.diff(loss[30, mid:]) >= 0)


def test_two_gear_map_dominates_fixed_gear(cfg):
    """With matched first-gear ratio the two-gear box only adds components."""
    tgt = synthesize(RatioSet(48, 44, teeth_g2=20), cfg)
    fgt = synthesize(RatioSet(48, 44), cfg)
    res = (80, 80)
    m2, m1 = build_loss_map(tgt, 1, cfg, res), build_loss_map(fgt, 1, cfg, res)
    assert np.array_equal(m2.torque, m1.torque) and np.array_equal(m2.speed, m1.speed)
    assert np.all(m2.loss >= m1.loss)
    assert np.all(m2.loss[1:] > m1.loss[1:])


def test_inertia_term(fgt_maps, fgt, cfg):
    r_w = cfg.vehicle.wheel_radius
    assert inertia_power(2.0, 10.0, -1.0, 0.5) == -80.0
    lmap = fgt_maps[1]
    base = interpolate_loss(lmap, 300.0, 100.0)
    assert np.isclose(total_gearbox_loss(lmap, 300.0, 100.0, 10.0, 0.5, fgt.inertia, r_w),
                      base + fgt.inertia * 5.0 / r_w**2)


def test_export_csv(tmp_path, fgt, cfg):
    lmap = build_loss_map(fgt, 1, cfg, (4, 5))
    path = tmp_path / "map.csv"
    export_map_csv(lmap, path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 20
    assert float(rows[7]["loss_W"]) == lmap.loss[1, 2]
    assert rows[0]["efficiency"] == ""  # no power flows at standstill
    eff = [float(r["efficiency"]) for r in rows if r["efficiency"]]
    assert all(0 < e < 1 for e in eff)


def test_bad_resolution(fgt, cfg):
    with pytest.raises(ValueError):
        build_loss_map(fgt, 1, cfg, (1, 10))


def test_build_loss_maps_keys(fgt, tgt, cfg):
    assert set(build_loss_maps(fgt, cfg, (3, 3))) == {1}
    assert set(build_loss_maps(tgt, cfg, (3, 3))) == {1, 2}
    assert np.ndim(GearboxLossModel(fgt, cfg).total(1, 100.0, 10.0)) == 0
