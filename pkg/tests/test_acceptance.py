"""Acceptance criteria, one PASS/FAIL line each.

Every test records a single line through :func:`record`; the lines are
echoed immediately (visible with ``-s``) and repeated in the pytest terminal
summary. Run ``pytest tests/test_acceptance.py -v`` or execute this file
directly. Tolerances are the acceptance tolerances and are not relaxed:
a criterion that the model cannot meet stays red, with its diagnostics.
"""
from __future__ import annotations

import math
import os
import time

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

import oracles as orc
from evtransmission.config import AirProps, BearingParams, Config, RatioSet
from evtransmission.cycles import cadc_like, synthetic_cycle
from evtransmission.lossmap import GearboxLossModel, build_loss_map, build_loss_maps
from evtransmission.losses import (
    air_fluid, bearing_drag_coeffs, bearing_losses, bearing_roll_coeff, churning_power, clutch_windage,
    gear_rolling_force, gear_sliding_force, hertz_pressure, mesh_geometry, mesh_power, mesh_state, oil_fluid,
    oil_viscosity, rolling_force_density, shaft_churning, sliding_coefficient, synchro_drag, synchro_drag_coeff,
    windage_power,
)
from evtransmission.powertrain import em_power, road_load
from evtransmission.search import PAPER_FEASIBLE_COUNTS, enumerate_designs, feasible_counts, search
from evtransmission.shifting import actuator_energy, brute_force_schedule, dp_schedule, shift_energy
from evtransmission.synthesis import (
    SIGMA_S, check_gradeability, clutch_force_coeff, clutch_radius_coeff, gear_width, gradeability_threshold,
    mass_and_inertia, pitch_radius, shaft_radius, size_clutch, synthesize,
)

RESULTS: dict[int, str] = {}
CFG = Config()
WORKERS = 8


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}"
    RESULTS[n] = line
    print("\n" + line)


# ------------------------------------------------------------------ 1

def _oracle_families(rng, n=25):
    """Yield ``(family, value, reference)`` for every closed form, ``n`` random inputs each."""
    cfg = CFG
    veh, gb, oil, bp = cfg.vehicle, cfg.gearbox, cfg.oil, cfg.bearing
    e = gb.youngs_modulus / (1 - gb.poisson_ratio**2)
    _, nu = oil_viscosity(oil.temperature, oil)
    fluid = oil_fluid(oil)
    dm = mp.mpf(bp.mean_diameter) * 1000
    bp_ref = type("BP", (), {**{f: getattr(bp, f) for f in bp.__dataclass_fields__}, "nu": nu})
    yield "sigma_s", SIGMA_S, orc.sigma_s()  # a pure constant: one evaluation is exhaustive
    for _ in range(n):
        rb = BearingParams(mean_diameter=rng.uniform(0.02, 0.2), drag_loss_factor=rng.uniform(1e-6, 1e-4),
                           element_constant=rng.uniform(1e-12, 1e-10), geometry_factor=rng.uniform(10, 500),
                           oil_level_factor=rng.uniform(0.1, 2), drag_exponent=rng.uniform(-1.6, -1.1))
        nu_r = rng.uniform(5e-6, 1e-4)
        dm_r = mp.mpf(rb.mean_diameter) * 1000
        s, s_bar = bearing_drag_coeffs(rb, nu_r)
        yield "sigma_b_drag", s, orc.sigma_bearing_drag(rb.drag_loss_factor, rb.element_constant, dm_r)
        yield "sigma_bar_b_drag", s_bar, orc.sigma_bar_bearing_drag(dm_r, rb.geometry_factor, rb.oil_level_factor,
                                                                     mp.mpf(nu_r) * 10**6, rb.drag_exponent)
        v, a, beta, m_gb = rng.uniform(0, 40), rng.uniform(-3, 3), rng.uniform(-0.2, 0.3), rng.uniform(0, 200)
        yield "road_load", road_load(v, a, beta, veh, m_gb), orc.road_load(
            v, a, beta, veh.air_density, veh.drag_coeff, veh.frontal_area, veh.mass, m_gb, veh.gravity,
            veh.rolling_coeff)
        p_req, p_loss = rng.uniform(-2e5, 1e5), rng.uniform(0, 3e3)
        yield "em_power", em_power(p_req, p_loss, 8e4, 0.7), orc.em_power(p_req, p_loss, 8e4, 0.7)
        grade, t_max = rng.uniform(0, 0.5), rng.uniform(100, 500)
        em = type(cfg.em)(max_torque=t_max)
        yield "gradeability", gradeability_threshold(veh, em, grade), orc.gradeability_rhs(
            veh.gravity, veh.wheel_radius, veh.mass, veh.rolling_coeff, grade, t_max)
        t = rng.uniform(10, 3000)
        yield "shaft_radius", shaft_radius(t), orc.shaft_radius(t)
        r_s, n_t, sp = rng.uniform(0.005, 0.1), int(rng.integers(10, 40)), rng.uniform(1, 3)
        yield "pitch_radius", pitch_radius(r_s, n_t, sp), orc.pinion_pitch_radius(r_s, n_t, sp)
        r = rng.uniform(0.01, 0.3)
        yield "gear_width", gear_width(r, n_t), orc.gear_width(r, n_t)
        p, nz, mu, phi = rng.uniform(2e5, 3e6), int(rng.integers(1, 6)), rng.uniform(0.1, 0.5), rng.uniform(0.3, 0.9)
        g = type(gb)(clutch_surface_pressure=p, clutch_plate_count=nz, clutch_friction=mu, clutch_radius_ratio=phi)
        yield "sigma_cl_o", clutch_radius_coeff(g), orc.sigma_clutch_outer(p, nz, mu, phi)
        yield "sigma_cl", clutch_force_coeff(g), orc.sigma_clutch_force(p, nz, mu)
        for got, ref in zip(size_clutch(t, g), orc.clutch(t, p, nz, mu, phi)):
            yield "clutch", got, ref
        rho, b, r_o, frac = rng.uniform(1000, 9000), rng.uniform(0.005, 1.5), rng.uniform(0.01, 0.3), rng.uniform(0, 0.8)
        m, j = mass_and_inertia(r_o, frac * r_o, b, rho)
        m_ref = orc.tube_mass(rho, b, r_o, frac * r_o)
        yield "mass", m, m_ref
        yield "inertia", j, orc.tube_inertia(m_ref, r_o, frac * r_o)
        w, rc, bw = rng.uniform(1, 1e5), rng.uniform(1e-3, 0.05), rng.uniform(1e-3, 0.1)
        yield "hertz", hertz_pressure(w, rc, bw, e), orc.hertz_pressure(w, rc, bw, e)
        ph, sr, ve, nu_cp, rough = (rng.uniform(0.1, 2), rng.uniform(-1.5, 1.5), rng.uniform(0.1, 40),
                                    rng.uniform(2, 100), rng.uniform(0.1, 1))
        yield "sliding_force", sliding_coefficient(ph, sr, ve, nu_cp, rc, rough, oil.ehl_coeffs) * w, \
            orc.sliding_force(ph, sr, ve, nu_cp, rc, rough, w, oil.ehl_coeffs)
        visc = rng.uniform(1e-3, 0.1)
        yield "rolling_force", rolling_force_density(w, ve, rc, bw, e, visc, 2e-8), \
            orc.rolling_force_density(w, ve, rc, bw, e, visc, 2e-8)
        omega, h, z = rng.uniform(1, 1500), rng.uniform(0.01, 2.0), int(rng.integers(17, 80))
        p_p, p_f, p_c = churning_power(r_o, 0.85 * r_o, bw, omega, fluid, h, n_teeth=z)
        yield "churn_peripheral", p_p, orc.churn_peripheral(fluid.viscosity, bw, r_o, omega, h)
        re = fluid.density * omega * r_o**2 / fluid.viscosity
        c = fluid.laminar if re < fluid.reynolds_threshold else fluid.turbulent
        yield "churn_face", p_f, orc.churn_face(c.b10, c.b11, c.b12, c.b13, c.b14, fluid.temperature,
                                                 fluid.viscosity, omega, r_o, h)
        yield "churn_cavity", p_c, orc.churn_cavity(z * mp.acos(1 - mp.mpf(h)) / mp.pi, fluid.viscosity,
                                                     mp.pi / z, omega, r_o, 0.85 * r_o, 1, 1)
        load = rng.uniform(1, 2e4)
        g_r = mp.mpf(bp.roll_factor) * dm ** mp.mpf("1.96") * mp.mpf(load) ** mp.mpf("0.54")
        yield "sigma_b_r", bearing_roll_coeff(load, bp, nu), orc.sigma_bearing_roll(
            bp.inlet_reduction, bp.starvation, g_r, mp.mpf(nu) * 10**6)
        for got, ref in zip(bearing_losses(omega, load, bp, oil), orc.bearing_power(omega, load, bp_ref)):
            yield "bearing", got, ref
        d, gap, length = rng.uniform(0.03, 0.15), rng.uniform(1e-4, 1e-3), rng.uniform(5e-3, 0.03)
        sig = synchro_drag_coeff(d, gap, length, oil)
        sig_ref = orc.sigma_synchro(nu, oil.density, length, gap, d)
        yield "sigma_syn", sig, sig_ref
        ws, wg = rng.uniform(0, 1500), rng.uniform(0, 1500)
        yield "synchro_power", synchro_drag(ws, wg, sig), orc.synchro_power(sig_ref, ws, wg)
        f, stroke, eta = rng.uniform(10, 5000), rng.uniform(1e-3, 0.02), rng.uniform(0.3, 1)
        yield "actuator", actuator_energy(f, stroke, eta), orc.actuator_energy(f, stroke, eta)
        torque, j1, j2 = rng.uniform(-300, 300), rng.uniform(0.01, 2), rng.uniform(0.5, 10)
        zeta, slip, t_sh, act = rng.uniform(2, 30), rng.uniform(1, 900), rng.uniform(0.1, 1), rng.uniform(0, 50)
        yield "shift_energy", shift_energy(torque, j1, j2, zeta, slip, act, 1.0, t_sh), orc.shift_energy_quad(
            torque, j1, j2, zeta, slip, orc.shift_horizon(slip, zeta, 1.0, t_sh), act)


def test_criterion_01_formula_oracles():
    rng = np.random.default_rng(1)
    worst: dict[str, float] = {}
    counts: dict[str, int] = {}
    for family, got, ref in _oracle_families(rng):
        worst[family] = max(worst.get(family, 0.0), orc.rel_err(got, ref))
        counts[family] = counts.get(family, 0) + 1
    bad = {k: v for k, v in worst.items() if v >= 1e-10}
    enough = all(c >= 20 for k, c in counts.items() if k != "sigma_s")
    ok = not bad and enough
    record(1, ok, f"{len(worst)} closed forms vs mpmath (50 digits), >=25 draws each; "
                  f"worst rel err {max(worst.values()):.2e} ({max(worst, key=worst.get)}); tol 1e-10")
    assert ok, bad


# ------------------------------------------------------------------ 2

def test_criterion_02_gradeability():
    thr = gradeability_threshold(CFG.vehicle, CFG.em, CFG.gearbox.max_grade)
    passes = check_gradeability(RatioSet(55, 38), CFG)[0]
    sub = [RatioSet(31, 31), RatioSet(17, 31), RatioSet(25, 27), RatioSet(20, 34)]
    sub = [rs for rs in sub if rs.gear_ratios()[0] * rs.gamma_fd < thr]
    fails = [not check_gradeability(rs, CFG)[0] for rs in sub]
    ok = abs(thr - 2.375) <= 0.01 and passes and len(sub) >= 3 and all(fails)
    record(2, ok, f"threshold {thr:.5f} (2.375 +/- 0.01); 55/38 passes={passes}; "
                  f"{sum(fails)}/{len(sub)} sub-threshold products rejected "
                  f"(31/17 x 31/17 = {(31 / 17) ** 2:.3f} lies above the threshold and is not used)")
    assert ok


# ------------------------------------------------------------------ 3

def test_criterion_03_dp_vs_brute_force():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    mismatches = 0
    for case in range(200):
        n = int(rng.integers(1, 13))
        stage = rng.uniform(0, 10, (n, 2))
        if case % 3 == 0:
            stage[rng.random((n, 2)) < 0.2] = np.inf
        if case % 5 == 0:
            stage = np.round(stage)
        shift = rng.uniform(0, 3, (n, 2))
        mismatches += dp_schedule(stage, shift)[0] != brute_force_schedule(stage, shift)[0]
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 10
    record(3, ok, f"200 instances (1..12 samples, with infeasible states and ties): {mismatches} objective "
                  f"mismatches, bit-exact comparison; {dt:.2f} s")
    assert ok


# ------------------------------------------------------------------ 4

def test_criterion_04_shift_energy_quadrature():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        torque, j1, j2 = rng.uniform(-300, 300), rng.uniform(0.01, 2), rng.uniform(0.5, 10)
        zeta, slip, t_sh = rng.uniform(2, 30), rng.uniform(1, 900), rng.uniform(0.1, 1.0)
        act = rng.uniform(0, 50)
        h = min(math.log(slip) / zeta if slip > 1 else 0.0, t_sh)

        def integrand(t):
            w = slip * math.exp(-zeta * t)
            return ((j1 + j2) * abs(torque) + j1 * j2 * zeta * w) * w / (j1 + j2)

        ref = quad(integrand, 0.0, h, epsabs=0.0, epsrel=1e-13, limit=200)[0] + act
        worst = max(worst, abs(shift_energy(torque, j1, j2, zeta, slip, act, 1.0, t_sh) - ref) / ref)
    ok = worst < 1e-8
    record(4, ok, f"closed form vs adaptive quadrature, 50 draws: worst rel err {worst:.2e} (tol 1e-8)")
    assert ok


# ------------------------------------------------------------------ 5

def _map_error(model, design, gear, res, queries):
    lmap = build_loss_map(design, gear, CFG, res, model)
    w, t = queries
    direct = model.total(gear, w, t)
    interp = lmap.interpolate(w, t)[0]
    err = np.abs(interp - direct)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(direct > 0, err / direct, 0.0)
    return rel, err, direct


def test_criterion_05_loss_map_fidelity():
    rng = np.random.default_rng(5)
    cases = [(synthesize(RatioSet(55, 38), CFG), 1), (synthesize(RatioSet(48, 44, 20), CFG), 1),
             (synthesize(RatioSet(48, 44, 20), CFG), 2)]
    worst, ratios, notes = 0.0, [], []
    for design, gear in cases:
        model = GearboxLossModel(design, CFG)
        t_max = design.overall_ratio(1) * CFG.em.max_torque
        q = rng.uniform(0, CFG.em.max_speed, 1000), rng.uniform(-t_max, t_max, 1000)
        rel200, abs200, direct = _map_error(model, design, gear, (200, 200), q)
        # 400 nodes: step ratio 199/399. An odd count (399, exactly half) puts a node on T = 0, where the
        # load-insensitive EHL rolling force jumps to zero, and bilinear cells then straddle the jump.
        _, abs400, _ = _map_error(model, design, gear, (400, 400), q)
        _, abs399, _ = _map_error(model, design, gear, (399, 399), q)
        worst = max(worst, rel200.max())
        ratios.append(abs400.max() / abs200.max())
        k = int(np.argmax(rel200))
        notes.append(f"{design.ratio_set.key()} g{gear}: max {rel200.max():.3f} at w={q[0][k]:.3g} rad/s, "
                     f"T={q[1][k]:.0f} N m (P={direct[k]:.3g} W), p99 {np.quantile(rel200, 0.99):.4f}, "
                     f"median {np.median(rel200):.1e}, max abs {abs200.max():.2f} W -> {abs400.max():.2f} W at 400x400 "
                     f"({abs399.max():.1f} W at 399x399, node on the T=0 jump)")
    ok = worst < 0.01 and all(r <= 2.5 / 2 for r in ratios)
    record(5, ok, f"1000 queries per map at 200x200: worst rel err {worst:.3f} (tol 0.01); grid-halving max-abs-error "
                  f"ratios {', '.join(f'{r:.2f}' for r in ratios)} (tol 1.25). " + " | ".join(notes))
    assert ok


# ------------------------------------------------------------------ 9, 6, 11 (shared sweeps)

@pytest.fixture(scope="module")
def fgt_sweeps(tmp_path_factory):
    d = tmp_path_factory.mktemp("fgt")
    cycle = synthetic_cycle(1000, seed=0)
    t0 = time.perf_counter()
    par = search(cycle, CFG, "fgt", (200, 200), jobs=WORKERS, ranking_path=d / "jobs8.csv")
    t_par = time.perf_counter() - t0
    ser = search(cycle, CFG, "fgt", (200, 200), jobs=1, ranking_path=d / "jobs1.csv")
    return cycle, par, t_par, ser, d


def test_criterion_09_desk_scale_runtime(fgt_sweeps, tmp_path):
    _, par, t_fgt, _, _ = fgt_sweeps
    cycle2 = synthetic_cycle(200, seed=0)
    t0 = time.perf_counter()
    res2 = search(cycle2, CFG, "2gt", (40, 40), jobs=WORKERS, ranking_path=tmp_path / "2gt.csv")
    t_2gt = time.perf_counter() - t0
    ok = t_fgt < 60 and t_2gt < 600 and math.isfinite(par.best.energy) and math.isfinite(res2.best.energy)
    record(9, ok, f"FGT {par.n_enumerated} designs, 1000 samples, 200x200, {WORKERS} workers: {t_fgt:.1f} s "
                  f"(limit 60 s); 2GT {res2.n_enumerated} designs, 200 samples, 40x40: {t_2gt:.1f} s (limit 600 s); "
                  f"{os.cpu_count()} CPU(s) available; winners {par.best.key} / {res2.best.key}")
    assert ok


def test_criterion_06_gradeability_superset(fgt_sweeps):
    cycle, on, _, _, _ = fgt_sweeps
    # designs rejected only for gradeability are evaluated separately; the union is the unconstrained sweep
    extra = [RatioSet(e.key[0], e.key[2]) for e in on.evaluations
             if not e.evaluated and e.feasibility.ok(use_gradeability=False)]
    off = search(cycle, CFG, "fgt", (200, 200), gradeability=False, designs=extra)
    best_on = on.best.energy
    best_off = min(best_on, off.best.energy if off.evaluations else math.inf)
    winner_off = on.best.key if best_off == best_on else off.best.key
    ok = best_off <= best_on
    record(6, ok, f"FGT optimum gradeability OFF {best_off / 3.6e6:.4f} kWh {winner_off} <= ON "
                  f"{best_on / 3.6e6:.4f} kWh {on.best.key} on the 1000-sample cycle ({len(extra)} extra designs); "
                  f"published direction 8.12 < 8.30 kWh, absolute values not comparable")
    assert ok


def test_criterion_11_determinism(fgt_sweeps, tmp_path):
    cycle, par, _, ser, d = fgt_sweeps
    same_fgt = par.best.key == ser.best.key and (d / "jobs8.csv").read_bytes() == (d / "jobs1.csv").read_bytes()
    designs = enumerate_designs(CFG, "2gt")[::80]
    short = synthetic_cycle(200, seed=0)
    a = search(short, CFG, "2gt", (40, 40), jobs=1, ranking_path=tmp_path / "a.csv", designs=designs)
    b = search(short, CFG, "2gt", (40, 40), jobs=3, ranking_path=tmp_path / "b.csv", designs=designs, chunk_size=17)
    same_2gt = a.best.key == b.best.key and (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ok = same_fgt and same_2gt
    record(11, ok, f"FGT full sweep at 1 vs {WORKERS} workers: identical winner {ser.best.key} and ranking file "
                   f"= {same_fgt}; 2GT {len(designs)}-design subset at 1 vs 3 workers: identical = {same_2gt}")
    assert ok


# ------------------------------------------------------------------ 7

def test_criterion_07_component_monotonicity():
    pairs = [((48, 44, 20), (48, 44)), ((55, 38, 30), (55, 38))]
    notes, ok = [], True
    for (g1, fd, g2), _ in pairs:
        two, one = synthesize(RatioSet(g1, fd, g2), CFG), synthesize(RatioSet(g1, fd), CFG)
        m2, m1 = build_loss_map(two, 1, CFG), build_loss_map(one, 1, CFG)
        same_axes = np.array_equal(m2.speed, m1.speed) and np.array_equal(m2.torque, m1.torque)
        good = same_axes and bool(np.all(m2.loss >= m1.loss))
        ok &= good
        notes.append(f"{g1}/{g2}/{fd} vs {g1}/{fd}: {int(np.sum(m2.loss >= m1.loss))}/{m2.loss.size} nodes, "
                     f"min excess above standstill {np.min(m2.loss[1:] - m1.loss[1:]):.3g} W")
    record(7, ok, "2GT >= FGT at every node of matched first-gear 200x200 maps: " + "; ".join(notes))
    assert ok


# ------------------------------------------------------------------ 8

def test_criterion_08_zero_speed_and_load():
    oil = CFG.oil
    fluid, air = oil_fluid(oil), air_fluid(AirProps(), oil)
    checks = {}
    torques = np.linspace(-1500, 1500, 31)
    for key in ("55/38", "48/20/44"):
        parts = [int(p) for p in key.split("/")]
        rs = RatioSet(parts[0], parts[-1], parts[1] if len(parts) == 3 else None)
        design = synthesize(rs, CFG)
        model = GearboxLossModel(design, CFG)
        for g in range(1, design.n_gears + 1):
            bd = model.evaluate(g, 0.0, torques)
            for name, val in bd.terms.items():
                checks[f"{key} g{g} {name}"] = bool(np.all(val == 0.0))
        geom = mesh_geometry(design.pairs["1"], CFG.gearbox)
        checks[f"{key} mesh_power"] = bool(np.all(mesh_power(geom, 0.0, torques, oil) == 0.0))
        st = mesh_state(geom, 0.0, torques)
        checks[f"{key} sliding(w=0)"] = bool(np.all(gear_sliding_force(st, oil) == 0.0))
        checks[f"{key} rolling(w=0)"] = bool(np.all(gear_rolling_force(st, oil) == 0.0))
        st0 = mesh_state(geom, np.linspace(1, 1000, 11), 0.0)
        checks[f"{key} sliding(W=0)"] = bool(np.all(gear_sliding_force(st0, oil) == 0.0))
    for h in (0.0, 0.5, 1.0, 2.0):
        checks[f"churning h={h}"] = all(np.all(p == 0.0) for p in churning_power(0.1, 0.09, 0.02, 0.0, fluid, h, 40))
        checks[f"shaft h={h}"] = shaft_churning(0.03, 0.2, 0.0, fluid, h) == 0.0
    checks["windage"] = windage_power(0.1, 0.02, 0.0, air) == 0.0
    checks["clutch"] = clutch_windage(0.1, 0.01, 0.0, air) == 0.0
    checks["bearing"] = all(bearing_losses(0.0, f, BearingParams(), oil)[3] == 0.0 for f in (0.0, 1e2, 1e4))
    checks["synchro"] = synchro_drag(0.0, 300.0, 1e-3) == 0.0
    bad = [k for k, v in checks.items() if not v]
    ok = not bad
    record(8, ok, f"{len(checks)} zero-speed / zero-load checks, exact equality: {len(bad)} non-zero {bad[:3]}")
    assert ok


# ------------------------------------------------------------------ 10

def test_criterion_10_feasible_counts():
    cycle = cadc_like()
    counts = feasible_counts(cycle, CFG)
    ok = all(abs(c["ratio"] - 1) <= 0.15 for c in counts.values())
    detail = "; ".join(f"{m.upper()} {c['feasible']} of {c['enumerated']} vs published {c['paper']} "
                       f"(ratio {c['ratio']:.2f})" for m, c in counts.items())
    record(10, ok, f"{cycle.name}: {detail}; band +/-15%" + (" (PASS-with-note: exact match not asserted)" if ok
                                                               else " - see decisions ledger for the analysis"))
    assert ok
    assert set(PAPER_FEASIBLE_COUNTS) == set(counts)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q"]))
