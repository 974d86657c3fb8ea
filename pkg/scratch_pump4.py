# scratch: pump in the hierarchy-respecting regime g << B0, plus boost parameter scan
import time

import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace, build_elementary
from floqlab.units import angular


def pump(label, m, n0, sign, g, dim=40, periods=12, b0=20.0, delta=None):
    fp = FieldParams(b0=b0, m=m, omega_mod=1.0, delta=delta)
    space = HilbertSpace(qubit_levels=2, cavity_dims=(dim,))
    src = pump_source(space, fp, g=g)
    psi0 = (space.basis_state("e", (n0,)) + sign * space.basis_state("g", (n0,))) / np.sqrt(2.0)
    num = build_elementary(space, "number", 1)
    t_grid = np.linspace(0.0, periods * fp.period, periods * 8 + 1)
    t0 = time.time()
    res = propagate_unitary(src, psi0, t_grid, observables={"n": num}, space=None,
                            store_states=True)
    n_t = res.observables["n"]
    top = max((np.abs(s.reshape(2, dim)) ** 2).sum(axis=0)[-1] for s in res.states)
    per = n_t[::8]
    print(f"{label}: wall {time.time()-t0:.0f}s  top-level max {top:.1e}")
    print("   <n>:", " ".join(f"{v:.2f}" for v in per))
    for lo, hi in [(0, 10), (1, 11), (0, periods)]:
        sel = (t_grid >= lo * fp.period) & (t_grid <= hi * fp.period)
        print(f"   slope {lo}-{hi}: {np.polyfit(t_grid[sel], n_t[sel], 1)[0]:+.4f}")


pump("A +x in-window g=2 ", 1.0, 4, +1.0, 2.0)
pump("B -x reversal g=2  ", 1.0, 14, -1.0, 2.0)
pump("C m=0 control g=2  ", 0.0, 4, +1.0, 2.0)

print("\nboost scan: min/last fidelity over N=1..5, psi0=|+x>(|3>+|4>)/sqrt2")
dim = 24
space = HilbertSpace(qubit_levels=2, cavity_dims=(dim,))
num = build_elementary(space, "number", 1)
for b0 in (20.0, 30.0):
    for g in (1.5, 2.0, 2.5, 3.0):
        for dmul in (1.0, np.sqrt(5.0) / 2.0 + 0.5):  # phi, phi^2 multiples of omega_mod
            fp = FieldParams(b0=b0, m=1.0, omega_mod=1.0,
                             delta=dmul * (1.0 + np.sqrt(5.0)) / 2.0)
            src = pump_source(space, fp, g=g)
            psi0 = (space.basis_state("e", (3,)) + space.basis_state("g", (3,))
                    + space.basis_state("e", (4,)) + space.basis_state("g", (4,))) / 2.0
            t_grid = np.linspace(0.0, 5 * fp.period, 6)
            res = propagate_unitary(src, psi0, t_grid, space=None, store_states=True)
            fids = []
            for N in range(1, 6):
                tgt = (space.basis_state("e", (3 + N,)) + space.basis_state("g", (3 + N,))
                       + space.basis_state("e", (4 + N,)) + space.basis_state("g", (4 + N,))) / 2.0
                phases = np.exp(1j * angular(fp.delta_resolved) * np.arange(dim) * t_grid[N])
                undone = res.states[N].reshape(2, dim) * phases
                fids.append(abs(np.vdot(tgt.reshape(2, dim), undone)) ** 2)
            print(f"  b0={b0:4.0f} g={g:3.1f} delta={fp.delta_resolved:5.3f}: "
                  + " ".join(f"{f:.3f}" for f in fids))
