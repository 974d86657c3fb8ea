# scratch: early physics check of the energy pump (criterion-6 risk)
import time

import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace, build_elementary

fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)  # delta = golden * omega_mod
space = HilbertSpace(qubit_levels=2, cavity_dims=(40,))
src = pump_source(space, fp, g=13.0)

# qubit |+x>, cavity |4>
plus_x = (space.basis_state("e", (4,)) + space.basis_state("g", (4,))) / np.sqrt(2.0)
num = build_elementary(space, "number", 1)

periods = 12
t_grid = np.linspace(0.0, periods * fp.period, periods * 40 + 1)
t0 = time.time()
res = propagate_unitary(src, plus_x, t_grid, observables={"n": num}, space=space)
wall = time.time() - t0

n_t = res.observables["n"]
print(f"wall {wall:.1f}s  n(0)={n_t[0]:.3f}  n(end)={n_t[-1]:.3f}")
for k in range(0, periods + 1):
    print(f"  t={k*fp.period:5.1f}  <n>={n_t[k*40]:.3f}")

# least-squares slope over windows
for lo, hi in [(0, 10), (0, 12), (1, 11), (0, 5)]:
    sel = (t_grid >= lo * fp.period) & (t_grid <= hi * fp.period)
    slope = np.polyfit(t_grid[sel], n_t[sel], 1)[0]
    print(f"slope over periods {lo}-{hi}: {slope:.4f} (target 1/T={fp.omega_mod})")
