"""Error versus frequency for the five resistance corners.

Runs only the fast frequencies by default; pass --all to include 10 kHz,
which takes about a minute more.
"""

import sys

import qfpmem

freqs = (1e4, 1e6, 1e8, 1e9) if "--all" in sys.argv else (1e6, 1e8, 1e9)
rows = qfpmem.corner_sweep(freqs=freqs, amplitude=0.5)

print("corner  " + "".join(f"{f:>12.0e}" for f in freqs))
for corner in qfpmem.DEFAULT_CORNERS:
    vals = {r.frequency: r.mean_abs for r in rows if r.corner == corner.label}
    print(f"{corner.label:<8}" + "".join(f"{vals[f]:>12.3e}" for f in freqs))

# The error grows with frequency for every corner, since the package
# current is driven by the edge rate of the source.
