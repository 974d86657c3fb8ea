# scratch: boost fidelity with bare vs dressed cavity-frame phase removal
#   dressed ladder spacing = Delta + d/dn of torus-averaged upper-band energy
import numpy as np

from floqlab.engine import propagate_unitary
from floqlab.hamiltonians import FieldParams, pump_source
from floqlab.spaces import HilbertSpace
from floqlab.units import angular

PHI = (1.0 + np.sqrt(5.0)) / 2.0


def band_shift(b0, m, g, n, grid=96):
    # d(<|d|>/2)/dn with A = 2 g sqrt(n), torus-averaged, angular rad/us
    th1 = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    th2 = th1[:, None]
    def avg_d(nn):
        a = 2.0 * g * np.sqrt(nn)
        dx = b0 * (m + np.cos(th1)[None, :]) + a * np.cos(th2)
        dy = a * np.sin(th2) + 0.0 * dx
        dz = b0 * np.sin(th1)[None, :] + 0.0 * dx
        return np.sqrt(dx**2 + dy**2 + dz**2).mean()
    dn = 0.25
    return angular(0.5 * (avg_d(n + dn) - avg_d(n - dn)) / (2 * dn))


def boost(b0, g, delta_mul, n_lo, dim):
    fp = FieldParams(b0=b0, m=1.0, omega_mod=1.0, delta=delta_mul)
    space = HilbertSpace(qubit_levels=2, cavity_dims=(dim,))
    src = pump_source(space, fp, g=g)
    psi0 = (space.basis_state("e", (n_lo,)) + space.basis_state("g", (n_lo,))
            + space.basis_state("e", (n_lo + 1,)) + space.basis_state("g", (n_lo + 1,))) / 2.0
    t_grid = np.linspace(0.0, 5 * fp.period, 6)
    res = propagate_unitary(src, psi0, t_grid, space=None, store_states=True)
    shift = band_shift(b0, 1.0, g, n_lo + 0.5)
    ns = np.arange(dim)
    rows = []
    for N in range(1, 6):
        tgt = (space.basis_state("e", (n_lo + N,)) + space.basis_state("g", (n_lo + N,))
               + space.basis_state("e", (n_lo + 1 + N,))
               + space.basis_state("g", (n_lo + 1 + N,))) / 2.0
        tgt2 = tgt.reshape(2, dim)
        t = t_grid[N]
        for k, om in enumerate((angular(fp.delta_resolved), angular(fp.delta_resolved) + shift)):
            undone = res.states[N].reshape(2, dim) * np.exp(1j * om * ns * t)
            amp = np.vdot(tgt2, undone)
            if k == 0:
                bare_f, bare_a = abs(amp) ** 2, np.angle(amp)
            else:
                rows.append((abs(amp) ** 2, bare_f, bare_a))
    fid_d = " ".join(f"{r[0]:.3f}" for r in rows)
    fid_b = " ".join(f"{r[1]:.3f}" for r in rows)
    print(f"b0={b0:4.0f} g={g:3.1f} dmul={delta_mul:5.3f} n={n_lo}+  shift={shift:+.3f} rad/us")
    print(f"    bare   : {fid_b}")
    print(f"    dressed: {fid_d}  min={min(r[0] for r in rows):.3f}")


for b0, g, dmul, n_lo, dim in [
    (20.0, 1.2, PHI**2, 3, 20), (20.0, 1.5, PHI**2, 3, 20), (20.0, 2.0, PHI**2, 3, 20),
    (15.0, 1.2, PHI**2, 3, 20), (15.0, 1.5, PHI**3, 3, 20), (20.0, 1.5, PHI**3, 3, 20),
    (20.0, 2.0, PHI**3, 3, 20),
    (20.0, 0.8, PHI**2, 24, 44), (20.0, 1.0, PHI**2, 24, 44), (20.0, 1.3, PHI**2, 24, 44),
    (20.0, 1.0, PHI**3, 24, 44), (20.0, 1.3, PHI**3, 24, 44), (20.0, 1.0, PHI**4, 24, 44),
    (20.0, 1.0, PHI**3, 30, 50), (30.0, 1.2, PHI**3, 30, 50),
]:
    boost(b0, g, dmul, n_lo, dim)
