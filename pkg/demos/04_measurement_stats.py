"""From per-cycle resistance readings to the five simulation corners."""

import qfpmem

ms = qfpmem.read_measurements(qfpmem.data_path("measurements_synthetic.csv"))
stats = qfpmem.compute_stats(ms)
for state in ("on", "off"):
    s = stats[state]
    print(f"R_{state:<3} mean {s.mean:>9} max {s.max:>8} min {s.min:>8} ({s.count} cycles)")

print("\nR_off histogram")
for b in qfpmem.histogram(ms, "off", 10):
    print(f"  {b.lo:7.0f} - {b.hi:7.0f}  {'#' * b.count}")

print("\ncorners")
for c in qfpmem.corners_from_stats(stats):
    print(f"  {c.label}: R_on {c.r_on} ohm, R_off {c.r_off} ohm")
