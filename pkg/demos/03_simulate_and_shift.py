"""Simulate a drive cycle: fixed gear versus the globally optimal shift schedule.

Run: python3 demos/03_simulate_and_shift.py
"""
import numpy as np

from evtransmission import Config, RatioSet, build_loss_maps, nedc, optimize_shifts, simulate, synthesize

cfg = Config()
cycle = nedc()
print(f"Cycle {cycle.name}: {len(cycle)} s, {cycle.distance / 1000:.2f} km, top speed {cycle.v_max * 3.6:.0f} km/h\n")

fgt = synthesize(RatioSet(55, 38), cfg)
res = simulate(fgt, cycle, np.ones(len(cycle), int), build_loss_maps(fgt, cfg), cfg)
print(f"Fixed gear 55/38      : {res.energy_kwh:.4f} kWh "
      f"({res.energy_kwh / (cycle.distance / 1e5):.2f} kWh/100 km)")

tgt = synthesize(RatioSet(48, 44, teeth_g2=20), cfg)
maps = build_loss_maps(tgt, cfg)
for g in (1, 2):
    fixed = simulate(tgt, cycle, np.full(len(cycle), g), maps, cfg)
    print(f"Two-gear, stuck in {g}  : {'infeasible' if not fixed.feasible else f'{fixed.energy_kwh:.4f} kWh'}")
plan = optimize_shifts(tgt, cycle, maps, cfg)
print(f"Two-gear, DP schedule : {plan.cost / 3.6e6:.4f} kWh with {plan.n_shifts} shifts, "
      f"{np.mean(plan.schedule == 2):.0%} of the time in second gear")
if plan.events:
    e = max(plan.events, key=lambda ev: ev.energy)
    print(f"  most expensive shift at t={cycle.t[e.index]:.0f} s: slip {e.slip0:.1f} rad/s, {e.energy:.1f} J")

# Why the DP may never shift: compare the two gears sample by sample.
from evtransmission.powertrain import evaluate_gear  # noqa: E402

tr = {g: evaluate_gear(tgt, g, cycle, maps[g], cfg) for g in (1, 2)}
both = tr[1].feasible & tr[2].feasible
cheaper = np.count_nonzero(tr[2].p_ac[both] < tr[1].p_ac[both])
drive = both & (tr[1].p_m > 0)
print(f"  second gear is cheaper on {cheaper} of {both.sum()} samples where both gears work")
for g in (1, 2):
    t = tr[g]
    print(f"  gear {g} while driving: motor at {t.omega[drive].mean():.0f} rad/s, gearbox loss "
          f"{t.p_loss[drive].mean():.0f} W, electrical {t.p_ac[drive].mean():.0f} W")
print("  second gear saves gearbox loss but pushes the motor into its low-speed, high-torque,\n"
      "  less efficient region, so staying in first is optimal on this cycle")
