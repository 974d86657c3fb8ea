# scratch: inspect Fock marginal early in the pump run
import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace

fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
space = HilbertSpace(qubit_levels=2, cavity_dims=(40,))
src = pump_source(space, fp, g=13.0)
plus_x = (space.basis_state("e", (4,)) + space.basis_state("g", (4,))) / np.sqrt(2.0)

t_grid = np.array([0.0, 0.05, 0.1, 0.2, 0.375])
res = propagate_unitary(src, plus_x, t_grid, space=None, store_states=True)
for t, psi in zip(res.times, res.states):
    marg = (np.abs(psi.reshape(2, 40)) ** 2).sum(axis=0)
    top = marg[-6:]
    print(f"t={t:6.3f} <n>={np.dot(np.arange(40), marg):7.3f} tail(n=34..39)={top}")
