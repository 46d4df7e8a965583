"""Check the integrator against the RL and RC closed forms.

The bundled step netlists drive a 0.5 V pulse into the package's series
R-L and shunt R-C.  Both should settle as 1 - exp(-t/tau).
"""

import numpy as np

import qfpmem

for name, probe, tau, final in [
    ("rl_step.cir", "i(L1)", 1.2e-9 / 20, 0.5 / 20),
    ("rc_step.cir", "v(a)", 10 * 25e-15, 0.5),
]:
    circuit = qfpmem.parse_netlist(open(qfpmem.data_path(name)).read())
    wf = qfpmem.transient(circuit)
    y = wf[probe]
    print(f"{name}: tau = {tau:.3g} s, {len(wf.t)} points")
    for k in (1, 2, 5):
        t = k * tau
        print(f"  t = {k} tau  simulated {np.interp(t, wf.t, y):.5g}  expected {final * (1 - np.exp(-k)):.5g}")
