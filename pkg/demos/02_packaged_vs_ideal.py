"""One packaged cell against its ideal twin at 1 GHz.

The pad capacitance and bond-wire inductance ring on every edge of the
square wave, so the memristor current in the packaged cell overshoots
the ideal one.  delta_i is that difference.
"""

import numpy as np

import qfpmem

pair = qfpmem.simulate_pair(323.4, 2924.655, 1e9, 0.5)
di = pair.delta["delta_i"]
stats = qfpmem.average_error(pair.delta, pair.period)

print(f"period {pair.period:.3g} s, {len(pair.delta.t)} samples over 5 cycles")
print(f"peak |delta_i|   {np.abs(di).max():.3e} A")
print(f"mean |delta_i|   {stats.mean_abs:.3e} A")
print(f"signed mean      {stats.signed_mean:.3e} A")

# Shrink the package to almost nothing and the two cells agree.
tiny = qfpmem.PackageParasitics(10.0, 10.0, 1e-18, 1e-21)
pair = qfpmem.simulate_pair(323.4, 2924.655, 1e9, 0.5, pkg=tiny)
print(f"degenerate package: peak |delta_i| {np.abs(pair.delta['delta_i']).max():.1e} A")
