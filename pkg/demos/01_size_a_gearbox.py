"""Size the two reference gearboxes and inspect what the sizing rules produce.

Run: python3 demos/01_size_a_gearbox.py
"""
from evtransmission import Config, RatioSet, synthesize
from evtransmission.synthesis import check_gradeability, gradeability_threshold

cfg = Config()

thr = gradeability_threshold(cfg.vehicle, cfg.em, cfg.gearbox.max_grade)
print(f"Launching on the maximum grade needs an overall first-gear ratio of at least {thr:.3f}.\n")

for rs in (RatioSet(55, 38), RatioSet(48, 44, teeth_g2=20)):
    design = synthesize(rs, cfg)
    ok, margin = check_gradeability(rs, cfg)
    print(f"{rs}  ({design.n_gears} gear{'s' if design.n_gears > 1 else ''})")
    print(f"  overall ratio(s): {', '.join(f'{design.overall_ratio(g):.3f}' for g in range(1, design.n_gears + 1))}"
          f"   gradeability {'ok' if ok else 'FAILS'} (margin {margin:+.3f})")
    print(f"  centre distance {design.center_distance * 1e3:.1f} mm, gearbox mass {design.mass:.1f} kg, "
          f"J1 {design.j1:.3f} kg m^2, J2 {design.j2:.3f} kg m^2")
    for c in design.components:
        print(f"    {c.kind:<8}{c.name:<12} r_o {c.r_outer * 1e3:7.1f} mm  width {c.width * 1e3:7.1f} mm  "
              f"mass {c.mass:7.2f} kg")
    print()
