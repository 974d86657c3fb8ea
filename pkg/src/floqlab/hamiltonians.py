"""Device parameters and Hamiltonian builders.

All builders return dense operators in angular units (rad/us) while the
parameter objects carry cycle frequencies (GHz/MHz/kHz) as quoted on data
sheets; see units.py.  Time-dependent models are exposed both as per-instant
builders H(t) and as vectorized "sources" mapping a time array to a stacked
(n, dim, dim) array for the propagators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import HilbertSpace, Operator, SpaceError, build_elementary
from .units import GHZ_TO_MHZ, GOLDEN_RATIO, TWO_PI, angular


class DegenerateSpectrumError(ValueError):
    """Eigenbasis request on a (numerically) degenerate Hamiltonian."""


@dataclass(frozen=True)
class DeviceParams:
    """Measured chip constants; defaults are the characterized device values.

    omega_q_range/omega_r/omega_m in GHz, alpha/g_* in MHz, rates in kHz.
    """

    omega_q_range: tuple[float, float] = (3.9, 7.4)
    alpha: float = 240.0
    g_boost: float = 13.0
    g_readout: float = 90.0
    gamma_q: float = 13.9
    omega_r: float = 7.492
    kappa_r: float = 350.0
    omega_m: float = 5.04
    kappa_m: float = 84.0
    ej_ratio: float = 3.0

    def __post_init__(self):
        lo, hi = self.omega_q_range
        if not (0 < lo < hi):
            raise ValueError(f"invalid qubit tuning range {self.omega_q_range}")
        for name in ("alpha", "g_boost", "g_readout", "gamma_q", "kappa_r", "kappa_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.ej_ratio < 1.0:
            raise ValueError("ej_ratio is quoted as the larger/smaller junction ratio (>= 1)")

    @property
    def t1(self) -> float:
        """Qubit lifetime in us implied by gamma_q (cycle kHz)."""
        return 1.0 / (TWO_PI * self.gamma_q * 1e-3)


@dataclass(frozen=True)
class FieldParams:
    """Synthesized rotating-frame field: strengths in MHz.

    The x component is b0*(m + cos(omega_mod*t)) and the z component
    b0*sin(omega_mod*t); delta is the boost-cavity detuning and defaults to a
    golden-ratio multiple of omega_mod so the two rates stay incommensurate.
    """

    b0: float = 20.0
    m: float = 1.0
    omega_mod: float = 1.0
    delta: float | None = None

    def __post_init__(self):
        if self.b0 < 0 or self.omega_mod <= 0:
            raise ValueError("b0 must be >= 0 and omega_mod > 0")

    @property
    def delta_resolved(self) -> float:
        return GOLDEN_RATIO * self.omega_mod if self.delta is None else self.delta

    @property
    def period(self) -> float:
        """Modulation period in us."""
        return 1.0 / self.omega_mod


def field_vector(fp: FieldParams, t, circular: bool = False):
    """Field components (b_x, b_z) in MHz at time(s) t.

    Elliptic (default): b_x = b0*(m + cos), b_z = b0*sin.  Circular drops the
    m offset, tracing a circle of radius b0.
    """
    wt = angular(fp.omega_mod) * np.asarray(t, dtype=float)
    bx = fp.b0 * (np.cos(wt) if circular else fp.m + np.cos(wt))
    bz = fp.b0 * np.sin(wt)
    return bx, bz


def flux_to_frequency(params: DeviceParams, phi) -> np.ndarray | float:
    """Qubit frequency (GHz) vs reduced flux for an asymmetric two-junction loop.

    omega(phi) = omega_max * (cos^2(pi phi) + d^2 sin^2(pi phi))^(1/4) with
    d = (r-1)/(r+1); omega_max is pinned to the top of the tuning range.
    """
    d = (params.ej_ratio - 1.0) / (params.ej_ratio + 1.0)
    omega_max = params.omega_q_range[1]
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(np.pi * phi), np.sin(np.pi * phi)
    out = omega_max * (c * c + d * d * s * s) ** 0.25
    return out if out.ndim else float(out)


def transmon_hamiltonian(space: HilbertSpace, omega_q: float, alpha: float) -> Operator:
    """Duffing-ladder qubit energies: E_j = j*omega_q - alpha*j*(j-1)/2.

    omega_q in GHz, alpha in MHz; diagonal in the qubit factor (rad/us).
    For a 2-level space this is omega_q*sigma_z/2 up to an identity shift.
    """
    levels = np.arange(space.qubit_levels, dtype=float)
    energies = angular(levels * omega_q * GHZ_TO_MHZ - 0.5 * alpha * levels * (levels - 1.0))
    diag = np.zeros(space.qubit_levels)
    for j, e in enumerate(energies):
        diag[space.qubit_level_index(j)] = e
    return space.embed(np.diag(diag), 0)


def _require_single_cavity(space: HilbertSpace):
    if space.n_cavities != 1:
        raise SpaceError(f"model needs exactly one cavity mode, space has {space.n_cavities}")


def jaynes_cummings_hamiltonian(
    space: HilbertSpace,
    params: DeviceParams,
    omega_d: float,
    omega_drive_amp: float,
    t: float,
    omega_q: float = 4.7,
) -> Operator:
    """Lab-frame driven Jaynes-Cummings model at time t (rad/us).

    H = w_c n + w_q sigma_z/2 + g (adag sigma- + a sigma+) + Amp cos(w_d t) sigma_x
    with the boost cavity (omega_m, g_boost).  omega_d/omega_q in GHz, the
    drive amplitude in MHz, t in us.  omega_q defaults to the 4.7 GHz bias
    point at which the device constants were quoted.
    """
    _require_single_cavity(space)
    wc = angular(params.omega_m * GHZ_TO_MHZ)
    wq = angular(omega_q * GHZ_TO_MHZ)
    g = angular(params.g_boost)
    wd = angular(omega_d * GHZ_TO_MHZ)
    amp = angular(omega_drive_amp)
    h = wc * build_elementary(space, "number", 1)
    h = h + 0.5 * wq * build_elementary(space, "sigma_z")
    h = h + g * (
        build_elementary(space, "adag", 1) @ build_elementary(space, "sigma_minus")
        + build_elementary(space, "a", 1) @ build_elementary(space, "sigma_plus")
    )
    h = h + amp * np.cos(wd * t) * build_elementary(space, "sigma_x")
    return h


def rotating_frame_hamiltonian(
    space: HilbertSpace,
    delta: float,
    qubit_detuning: float,
    drive_amp: float,
    g: float = 0.0,
) -> Operator:
    """Drive-frame model: Delta n + delta sigma_z/2 + Omega sigma_x/2 + JC coupling.

    delta is the cavity-drive detuning (MHz), qubit_detuning the qubit-drive
    detuning (MHz), drive_amp the Rabi amplitude (MHz).  Works on a bare qubit
    space (no cavity, g must then be 0) or qubit + one cavity.
    """
    h = 0.5 * angular(qubit_detuning) * build_elementary(space, "sigma_z")
    h = h + 0.5 * angular(drive_amp) * build_elementary(space, "sigma_x")
    if space.n_cavities == 0:
        if g:
            raise SpaceError("coupling g given but the space has no cavity")
        return h
    _require_single_cavity(space)
    h = h + angular(delta) * build_elementary(space, "number", 1)
    if g:
        h = h + angular(g) * (
            build_elementary(space, "adag", 1) @ build_elementary(space, "sigma_minus")
            + build_elementary(space, "a", 1) @ build_elementary(space, "sigma_plus")
        )
    return h


def pump_hamiltonian(space: HilbertSpace, fp: FieldParams, t: float, g: float = 13.0) -> Operator:
    """Energy-pump model at time t: (1/2) sigma.B(t) + Delta n + JC coupling.

    Equivalent to rotating_frame_hamiltonian evaluated on the elliptic field:
    qubit_detuning = b0 sin(w t), drive_amp = b0 (m + cos(w t)).
    """
    bx, bz = field_vector(fp, t)
    return rotating_frame_hamiltonian(space, fp.delta_resolved, float(bz), float(bx), g=g)


def pump_source(space: HilbertSpace, fp: FieldParams, g: float = 13.0):
    """Vectorized pump Hamiltonian: times (n,) -> stacked (n, dim, dim)."""
    _require_single_cavity(space)
    static = angular(fp.delta_resolved) * build_elementary(space, "number", 1)
    if g:
        static = static + angular(g) * (
            build_elementary(space, "adag", 1) @ build_elementary(space, "sigma_minus")
            + build_elementary(space, "a", 1) @ build_elementary(space, "sigma_plus")
        )
    hx = 0.5 * build_elementary(space, "sigma_x")
    hz = 0.5 * build_elementary(space, "sigma_z")

    def source(times: np.ndarray) -> np.ndarray:
        bx, bz = field_vector(fp, times)
        out = np.broadcast_to(static, (len(times), *static.shape)).copy()
        out += angular(bx)[:, None, None] * hx
        out += angular(bz)[:, None, None] * hz
        return out

    return source


def qubit_field_source(x_of_t, z_of_t):
    """Two-level source H(t) = (1/2)(x(t) sigma_x + z(t) sigma_z), inputs in MHz.

    x_of_t/z_of_t must accept a time array and return amplitudes in MHz.
    """
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)

    def source(times: np.ndarray) -> np.ndarray:
        x = angular(np.asarray(x_of_t(times), dtype=float))
        z = angular(np.asarray(z_of_t(times), dtype=float))
        return 0.5 * (x[:, None, None] * sx + z[:, None, None] * sz)

    return source


def static_source(h: Operator):
    """Source wrapper for a time-independent Hamiltonian."""
    h = np.asarray(h, dtype=complex)

    def source(times: np.ndarray) -> np.ndarray:
        return np.broadcast_to(h, (len(times), *h.shape))

    return source


def instantaneous_eigenbasis(h: Operator, gap_tol: float = 1e-9):
    """Eigenvalues (ascending) and gauge-fixed eigenvectors of a Hermitian h.

    Gauge: each eigenvector's largest-magnitude component is made real and
    positive (lowest index on ties).  Raises DegenerateSpectrumError when an
    adjacent gap is below gap_tol relative to the spectral scale, where the
    gauge (and the basis itself) is ill-defined.
    """
    h = np.asarray(h)
    evals, evecs = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(evals).max()))
    gaps = np.diff(evals)
    if len(gaps) and float(gaps.min()) < gap_tol * scale:
        raise DegenerateSpectrumError(
            f"adjacent eigenvalue gap {gaps.min():.3e} below tolerance; basis ill-defined"
        )
    mags = np.abs(evecs)
    # first index attaining the per-column max (ties -> lowest index)
    pivot = np.argmax(mags >= mags.max(axis=0, keepdims=True) - 0.0, axis=0)
    phases = evecs[pivot, np.arange(evecs.shape[1])]
    phases = phases / np.abs(phases)
    return evals, evecs / phases[None, :]
