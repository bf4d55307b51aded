"""Walk through the physical model: storage curve, evaporation, tributary
accounting, the hydropower cascade and one full transition."""

from resopt.synthetic import zletovica_system
from resopt.system import (
    StepRecord,
    WeightVector,
    evaporation,
    hydropower,
    interpolate_curve,
    transition,
    tributary_inflow,
)

spec = zletovica_system(steps_per_year=52, release_cap_enforced=False)

print("== storage curve ==")
for volume in (0.0, 1000.0, 6100.0, 12745.0, 22010.0):
    level, area = interpolate_curve(spec, volume)
    print(f"  volume {volume:>8.0f} 10^3 m^3 -> level {level:7.2f} m, area {area:.3f} km^2")

print("\n== evaporation (week 26, mid July) ==")
e = evaporation(spec, 15370.0, 15370.0, t=26)
print(f"  steady at 15,370: {e:.2f} 10^3 m^3/week")

rec = StepRecord(
    t=26, q=150.0, q1=230.0, q2=310.0, q3=390.0,
    d3=75.0, d4=160.0, d5=318.0, d6=240.0, d7=60.48, d8=600_000.0,
    d1=1021.5, d2=1060.0,
)
print("\n== tributary ==")
print(f"  q3 - q = {tributary_inflow(rec):.1f} 10^3 m^3 enters below the dam")

print("\n== hydropower cascade (release 500, r3=75, r4=160, r7=60.48) ==")
total, plants = hydropower(spec, rec, 500.0, 75.0, 160.0, 60.48, 1050.0, 1049.0)
for pid, energy in plants.items():
    print(f"  plant {pid}: {energy:12.0f} kWh")
print(f"  total:   {total:12.0f} kWh")

print("\n== one transition (storage 15,370 -> 14,500) ==")
weights = WeightVector(2e6, 2e6, 200, 1, 200, 1, 300, 1e-8)
out = transition(spec, rec, 15370.0, 14500.0, weights)
print(f"  release {out.r_total:.1f}, evaporation {out.evap:.2f}")
print(f"  user deliveries r3..r7: "
      + ", ".join(f"{x:.1f}" for x in out.user_releases()))
print(f"  deviations D1..D8: "
      + ", ".join(f"{d:.1f}" for d in out.deviations))
print(f"  step cost {out.reward:.4g}")
