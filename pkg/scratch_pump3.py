# scratch: positive-control pump, parameters chosen deep inside the band window
#   window (dynamical, coupling matrix element 2 g sqrt(n)):
#     B0(1-m) < 2 g sqrt(n) < B0(1+m)
#   g=3, B0=30, m=0.5 -> n in (6.25, 56.25); start n0=25, gap ~15 MHz >> omega_mod
import time

import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace, build_elementary


def run(label, m, n0, qubit, dim=70, periods=10, g=3.0, b0=30.0):
    fp = FieldParams(b0=b0, m=m, omega_mod=1.0)
    space = HilbertSpace(qubit_levels=2, cavity_dims=(dim,))
    src = pump_source(space, fp, g=g)
    if qubit == "+x":
        psi0 = (space.basis_state("e", (n0,)) + space.basis_state("g", (n0,))) / np.sqrt(2.0)
    else:
        psi0 = (space.basis_state("e", (n0,)) - space.basis_state("g", (n0,))) / np.sqrt(2.0)
    num = build_elementary(space, "number", 1)
    t_grid = np.linspace(0.0, periods * fp.period, periods * 8 + 1)
    t0 = time.time()
    res = propagate_unitary(src, psi0, t_grid, observables={"n": num}, space=None)
    n_t = res.observables["n"]
    per = n_t[:: 8]
    sel = t_grid >= fp.period
    slope = np.polyfit(t_grid[sel], n_t[sel], 1)[0]
    slope_all = np.polyfit(t_grid, n_t, 1)[0]
    print(f"{label}: wall {time.time()-t0:.0f}s  <n> per period:",
          " ".join(f"{v:.2f}" for v in per))
    print(f"    slope(all)={slope_all:+.4f}  slope(skip first)={slope:+.4f}")


run("+x, m=0.5 in-window ", 0.5, 25, "+x")
run("-x, m=0.5 in-window ", 0.5, 25, "-x")
run("+x, m=0   control   ", 0.0, 25, "+x")
