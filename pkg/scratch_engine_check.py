# scratch: engine validation against independent references
import numpy as np
import scipy.linalg

from floqlab.engine import propagate_lindblad, propagate_unitary
from floqlab.hamiltonians import rotating_frame_hamiltonian
from floqlab.spaces import HilbertSpace, build_elementary
from floqlab.units import TWO_PI

rng = np.random.default_rng(7)

# 1) piecewise-constant random H: engine vs scipy expm product (dim 9)
dim = 9
segs = 6
t_edges = np.sort(np.concatenate([[0.0], rng.uniform(0.1, 2.0, segs - 1).cumsum(), ]))
h_list = []
for _ in range(segs):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h_list.append((a + a.conj().T) / 2)

def h_of_t(times):
    idx = np.clip(np.searchsorted(t_edges, times, side="right") - 1, 0, segs - 1)
    return np.stack([h_list[i] for i in idx])

t_end = t_edges[-1] + 0.7
grid = np.concatenate([t_edges, [t_end]])
psi0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
psi0 /= np.linalg.norm(psi0)

res = propagate_unitary(h_of_t, psi0, grid)
# reference: exact product of expm over segments
psi_ref = psi0.copy()
for i in range(segs):
    dt = grid[i + 1] - grid[i]
    psi_ref = scipy.linalg.expm(-1j * h_list[i] * dt) @ psi_ref
res2 = propagate_unitary(h_of_t, psi0, grid, store_states=True)
defect = 1.0 - abs(np.vdot(psi_ref, res2.states[-1])) ** 2
print(f"unitary vs expm product: fidelity defect {defect:.3e}")

# large-dim Taylor path: same problem embedded at dim 20
dim2 = 20
h2 = []
for _ in range(segs):
    a = rng.normal(size=(dim2, dim2)) + 1j * rng.normal(size=(dim2, dim2))
    h2.append((a + a.conj().T) / 2)
def h2_of_t(times):
    idx = np.clip(np.searchsorted(t_edges, times, side="right") - 1, 0, segs - 1)
    return np.stack([h2[i] for i in idx])
psi0b = rng.normal(size=dim2) + 1j * rng.normal(size=dim2)
psi0b /= np.linalg.norm(psi0b)
resb = propagate_unitary(h2_of_t, psi0b, grid, store_states=True)
psi_refb = psi0b.copy()
for i in range(segs):
    dt = grid[i + 1] - grid[i]
    psi_refb = scipy.linalg.expm(-1j * h2[i] * dt) @ psi_refb
print(f"unitary (taylor path) defect {1 - abs(np.vdot(psi_refb, resb.states[-1]))**2:.3e}")

# 2) vacuum Rabi: |e,0> <-> |g,1> at sqrt(delta^2 + 4 g^2)
space = HilbertSpace(2, (6,))
delta_mhz, g_mhz = 5.0, 13.0
h = rotating_frame_hamiltonian(space, delta_mhz, 0.0, 0.0, g=g_mhz)
psi = space.basis_state("e", (0,))
pe_op = space.embed(np.diag([1.0, 0.0]), 0)
t = np.linspace(0, 0.5, 501)
r = propagate_unitary(h, psi, t, observables={"pe": pe_op}, space=space)
freq_ang = np.sqrt((TWO_PI * delta_mhz) ** 2 + 4 * (TWO_PI * g_mhz) ** 2)
amp = 4 * (TWO_PI * g_mhz) ** 2 / freq_ang**2
pe_exact = 1 - amp * np.sin(freq_ang * t / 2) ** 2
print(f"vacuum rabi max err {np.abs(r.observables['pe'] - pe_exact).max():.3e}")

# 3) Lindblad vs superop expm product, dim 4 with random collapse
dim3 = 4
a = rng.normal(size=(dim3, dim3)) + 1j * rng.normal(size=(dim3, dim3))
h3 = (a + a.conj().T) / 2
c1 = 0.4 * (rng.normal(size=(dim3, dim3)) + 1j * rng.normal(size=(dim3, dim3)))
rho0 = np.zeros((dim3, dim3), dtype=complex)
rho0[0, 0] = 1.0
grid3 = np.array([0.0, 0.8, 1.7])
res3 = propagate_lindblad(h3, rho0, grid3, collapse_ops=[c1], store_states=True)
eye = np.eye(dim3)
cdc = c1.conj().T @ c1
liou = (-1j * (np.kron(h3, eye) - np.kron(eye, h3.T))
        + np.kron(c1, c1.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T)))
vec = rho0.reshape(-1)
for i in range(2):
    vec = scipy.linalg.expm(liou * (grid3[i + 1] - grid3[i])) @ vec
rho_ref = vec.reshape(dim3, dim3)
print(f"lindblad vs superop expm: max abs diff {np.abs(rho_ref - res3.states[-1]).max():.3e}")

# 4) T1 decay rate
sp2 = HilbertSpace(2)
from floqlab.engine import NoiseModel
nm = NoiseModel(t1=11.5)
rho_e = np.diag([1.0, 0.0]).astype(complex)
tg = np.linspace(0, 20, 21)
rr = propagate_lindblad(np.zeros((2, 2)), rho_e, tg, noise=nm, space=sp2,
                        observables={"pe": np.diag([1.0, 0.0])})
err = np.abs(rr.observables["pe"] - np.exp(-tg / 11.5)).max()
print(f"t1 decay max err {err:.3e}")
