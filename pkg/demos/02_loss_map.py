"""Build a loss map, break the loss down by component and check interpolation.

Run: python3 demos/02_loss_map.py
"""
import numpy as np

from evtransmission import Config, GearboxLossModel, RatioSet, build_loss_map, synthesize

cfg = Config()
design = synthesize(RatioSet(48, 44, teeth_g2=20), cfg)
model = GearboxLossModel(design, cfg)

# one operating point: 4000 rpm at the motor, 600 N m at the wheels, first gear
omega, torque = 4000 * np.pi / 30, 600.0
bd = model.evaluate(1, omega, torque)
print(f"Loss breakdown at {omega:.0f} rad/s, {torque:.0f} N m, gear 1 (total {float(bd.total):.1f} W):")
for group in ("mesh", "churn", "windage", "shaft", "bearings", "clutch", "synchro"):
    print(f"  {group:<9}{float(bd.group(group)):9.2f} W")

lmap = build_loss_map(design, 1, cfg, (200, 200), model)
eff = lmap.efficiency()
print(f"\nMap: {lmap.resolution[0]}x{lmap.resolution[1]} nodes, peak efficiency {np.nanmax(eff):.4f}, "
      f"loss range {lmap.loss.min():.1f} .. {lmap.loss.max():.1f} W")

# interpolation against the forward model at random points away from the axes
rng = np.random.default_rng(0)
w = rng.uniform(50, cfg.em.max_speed, 500)
t = rng.uniform(50, lmap.torque[-1], 500) * rng.choice([-1, 1], 500)
rel = np.abs(lmap.interpolate(w, t)[0] - model.total(1, w, t)) / model.total(1, w, t)
print(f"Interpolation vs direct model on 500 points: median {np.median(rel):.1e}, max {rel.max():.1e}")
