# scratch: pump run with large cavity, truncation guard off
import time

import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace, build_elementary

fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
dim = 110
space = HilbertSpace(qubit_levels=2, cavity_dims=(dim,))
src = pump_source(space, fp, g=13.0)
psi0 = (space.basis_state("e", (4,)) + space.basis_state("g", (4,))) / np.sqrt(2.0)
num = build_elementary(space, "number", 1)
num2 = num @ num

periods = 12
t_grid = np.linspace(0.0, periods * fp.period, periods * 20 + 1)
t0 = time.time()
res = propagate_unitary(src, psi0, t_grid, observables={"n": num, "n2": num2},
                        space=None, store_states=True)
print(f"wall {time.time()-t0:.1f}s")
n_t = res.observables["n"]
sig = np.sqrt(res.observables["n2"] - n_t**2)
for k in range(0, periods + 1):
    psi = res.states[k * 20]
    marg = (np.abs(psi.reshape(2, dim)) ** 2).sum(axis=0)
    print(f"period {k:2d}  <n>={n_t[k*20]:7.3f}  sigma={sig[k*20]:6.2f}  top5={marg[-5:].sum():.2e}")
for lo, hi in [(0, 5), (0, 10), (0, 12), (1, 11), (2, 12)]:
    sel = (t_grid >= lo * fp.period) & (t_grid <= hi * fp.period)
    slope = np.polyfit(t_grid[sel], n_t[sel], 1)[0]
    print(f"slope periods {lo}-{hi}: {slope:.4f}")
