"""Time evolution engines: unitary and Lindblad propagation.

Both engines use midpoint-sampled piecewise-constant exponential stepping:
between requested grid points the Hamiltonian is sampled at substep midpoints
and each substep applies an exact matrix exponential, with the substep chosen
so ||H||*h <= 0.05.  Exponentials are evaluated spectrally (batched eigh, or
the closed form for 2x2) for the unitary engine and by scaled Taylor series
for the Lindblad superoperator; both are exact to machine precision per step,
so norm/trace stability is unconditional.

Hamiltonian "sources" are callables mapping a time array (n,) to a stacked
array (n, dim, dim); plain matrices and scalar-time callables are adapted
automatically.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .spaces import HilbertSpace, Operator, build_elementary
from .units import rate_from_khz

STEP_NORM_BUDGET = 0.05   # max ||H|| * h per substep
_SMALL_DIM_MAX = 16       # batched-spectral path for dims up to this
_CHUNK_ENTRIES = 2_000_000  # cap on chunk size in matrix entries


class EngineError(RuntimeError):
    """Propagation failed a sanity check (norm/trace/positivity)."""


class TruncationOverflowError(EngineError):
    """Cavity population reached the truncated top level."""


@dataclass(frozen=True)
class NoiseModel:
    """Open-system rates: t1/tphi in us, cavity loss in kHz, jitter in MHz.

    tphi is the Markovian (fast) dephasing time; sigma_quasistatic is the
    standard deviation of the shot-frozen detuning offset handled by
    quasistatic_average.  readout_error = (P(e|g), P(g|e)).
    """

    t1: float | None = None
    tphi: float | None = None
    kappa_m: float | None = None
    sigma_quasistatic: float = 0.0
    readout_error: tuple[float, float] = (0.02, 0.05)

    def __post_init__(self):
        for name in ("t1", "tphi", "kappa_m"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when set, got {v}")
        if self.sigma_quasistatic < 0:
            raise ValueError("sigma_quasistatic must be >= 0")
        pe, pg = self.readout_error
        if not (0 <= pe < 1 and 0 <= pg < 1):
            raise ValueError("readout_error entries must be probabilities")

    @property
    def any_markovian(self) -> bool:
        return any(v is not None for v in (self.t1, self.tphi, self.kappa_m))


def collapse_operators(noise: NoiseModel, space: HilbertSpace) -> list[Operator]:
    """Lindblad collapse operators for the given space.

    sqrt(1/T1) sigma-, sqrt(1/(2 Tphi)) sigma_z, sqrt(kappa) a per cavity.
    """
    ops = []
    if noise.t1 is not None:
        ops.append(math.sqrt(1.0 / noise.t1) * build_elementary(space, "sigma_minus"))
    if noise.tphi is not None:
        ops.append(math.sqrt(0.5 / noise.tphi) * build_elementary(space, "sigma_z"))
    if noise.kappa_m is not None:
        kappa = rate_from_khz(noise.kappa_m)
        for k in range(space.n_cavities):
            ops.append(math.sqrt(kappa) * build_elementary(space, "a", k + 1))
    return ops


@dataclass
class SimResult:
    """Observable time series plus optional state snapshots."""

    times: np.ndarray
    observables: dict[str, np.ndarray]
    states: list[np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.observables[name]


def as_source(h):
    """Adapt a matrix or callable into a vectorized Hamiltonian source."""
    if isinstance(h, np.ndarray):
        hc = np.asarray(h, dtype=complex)

        def const(times):
            return np.broadcast_to(hc, (len(times), *hc.shape))

        return const
    if not callable(h):
        raise TypeError("Hamiltonian must be a matrix or a callable")

    def wrapped(times):
        out = h(np.asarray(times, dtype=float))
        out = np.asarray(out, dtype=complex)
        if out.ndim == 2:  # scalar-time callable used on a length-1 array
            out = out[None, :, :]
        if out.ndim != 3 or out.shape[0] != len(times):
            raise EngineError("Hamiltonian source returned a wrong-shaped stack")
        return out

    # probe whether the callable already handles arrays
    try:
        probe = h(np.zeros(1))
        if np.asarray(probe).shape and np.asarray(probe).ndim == 3:
            return wrapped
    except Exception:
        pass

    def elementwise(times):
        times = np.asarray(times, dtype=float)
        return np.stack([np.asarray(h(float(t)), dtype=complex) for t in times])

    return elementwise


def _spectral_norms(h_stack: np.ndarray) -> np.ndarray:
    return np.abs(np.linalg.eigvalsh(h_stack)).max(axis=-1)


def _segment_substeps(source, t0: float, t1: float, step_factor: float) -> tuple[int, float]:
    """Number of substeps and substep length for one grid segment."""
    probes = np.array([t0, 0.5 * (t0 + t1), t1])
    lam = float(_spectral_norms(source(probes)).max())
    dt = t1 - t0
    if lam <= 0.0:
        return 1, dt
    h_target = STEP_NORM_BUDGET * step_factor / lam
    n = max(1, int(math.ceil(dt / h_target - 1e-12)))
    return n, dt / n


def _unitaries_2x2(h_stack: np.ndarray, h: float) -> np.ndarray:
    """Closed-form exp(-i h H) for a stack of 2x2 Hermitian matrices."""
    a0 = 0.5 * (h_stack[:, 0, 0] + h_stack[:, 1, 1]).real
    az = 0.5 * (h_stack[:, 0, 0] - h_stack[:, 1, 1]).real
    ax = h_stack[:, 0, 1].real
    ay = -h_stack[:, 0, 1].imag
    mag = np.sqrt(ax * ax + ay * ay + az * az)
    theta = mag * h
    cos_t = np.cos(theta)
    fac = h * np.sinc(theta / np.pi)  # sin(theta)/|a|, finite at |a| = 0
    u = np.empty_like(h_stack)
    u[:, 0, 0] = cos_t - 1j * fac * az
    u[:, 1, 1] = cos_t + 1j * fac * az
    u[:, 0, 1] = -1j * fac * (ax - 1j * ay)
    u[:, 1, 0] = -1j * fac * (ax + 1j * ay)
    return np.exp(-1j * a0 * h)[:, None, None] * u


def _unitaries_spectral(h_stack: np.ndarray, h: float) -> np.ndarray:
    lam, vec = np.linalg.eigh(h_stack)
    phase = np.exp(-1j * h * lam)
    return (vec * phase[:, None, :]) @ vec.conj().swapaxes(-1, -2)


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """Time-ordered product of a stack of matrices (index 0 acts first)."""
    while stack.shape[0] > 1:
        n = stack.shape[0]
        pairs = stack[1 : n - (n % 2) : 2] @ stack[0 : n - (n % 2) : 2]
        stack = np.concatenate([pairs, stack[-1:]], axis=0) if n % 2 else pairs
    return stack[0]


def _taylor_terms(x: float) -> int:
    """Terms so the exp series remainder at argument-norm x is below 1e-18."""
    term, k = 1.0, 0
    while term > 1e-18 and k < 60:
        k += 1
        term *= x / k
    return max(k, 4)


def _apply_expm_taylor(mat: np.ndarray, vec: np.ndarray, scale: complex, norm: float) -> np.ndarray:
    """(exp(scale * mat)) @ vec via a Taylor series; exact for small norms."""
    n_terms = _taylor_terms(abs(scale) * norm)
    acc = vec.copy()
    term = vec
    for j in range(1, n_terms + 1):
        term = (scale / j) * (mat @ term)
        acc = acc + term
    return acc


def _check_grid(t_grid: np.ndarray) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise EngineError("t_grid must be a non-empty 1-d array")
    if len(t_grid) > 1 and np.any(np.diff(t_grid) <= 0):
        raise EngineError("t_grid must be strictly increasing")
    return t_grid


def _truncation_mask(space: HilbertSpace) -> np.ndarray | None:
    if space is None or space.n_cavities == 0:
        return None
    mask = np.zeros(space.dim, dtype=bool)
    for k in range(space.n_cavities):
        proj = space.top_level_projector(k)
        mask |= np.diag(proj).real > 0.5
    return mask


def propagate_unitary(
    hamiltonian,
    psi0: np.ndarray,
    t_grid,
    observables: dict[str, Operator] | None = None,
    space: HilbertSpace | None = None,
    store_states: bool = False,
    step_factor: float = 1.0,
    norm_tol: float = 1e-8,
    truncation_tol: float = 1e-4,
) -> SimResult:
    """Schroedinger evolution of a pure state along t_grid.

    Observables are evaluated at every grid point (including the first).
    When a space with cavities is given, the top-Fock population is guarded
    against truncation overflow.
    """
    source = as_source(hamiltonian)
    t_grid = _check_grid(t_grid)
    psi = np.asarray(psi0, dtype=complex).copy()
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-9:
        raise EngineError("initial state is not normalized")
    dim = psi.shape[0]
    observables = observables or {}
    obs_items = [(name, np.asarray(op, dtype=complex)) for name, op in observables.items()]
    mask = _truncation_mask(space)

    series = {name: np.empty(len(t_grid)) for name, _ in obs_items}
    states = [] if store_states else None

    def record(i, psi):
        nrm = np.vdot(psi, psi).real
        if abs(nrm - 1.0) > norm_tol:
            raise EngineError(f"norm drift {nrm - 1.0:.3e} at t={t_grid[i]:.6g}")
        if mask is not None:
            top = float((np.abs(psi[mask]) ** 2).sum())
            if top > truncation_tol:
                raise TruncationOverflowError(
                    f"top Fock level population {top:.2e} at t={t_grid[i]:.6g}; enlarge the cavity"
                )
        for name, op in obs_items:
            series[name][i] = np.vdot(psi, op @ psi).real
        if states is not None:
            states.append(psi.copy())

    record(0, psi)
    for i in range(len(t_grid) - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub, h = _segment_substeps(source, t0, t1, step_factor)
        start = 0
        chunk = max(1, _CHUNK_ENTRIES // (dim * dim))
        while start < n_sub:
            stop = min(n_sub, start + chunk)
            mids = t0 + (np.arange(start, stop) + 0.5) * h
            h_stack = source(mids)
            if dim == 2:
                u_stack = _unitaries_2x2(h_stack, h)
            elif dim <= _SMALL_DIM_MAX:
                u_stack = _unitaries_spectral(h_stack, h)
            else:
                lam_bound = STEP_NORM_BUDGET * step_factor
                for k in range(h_stack.shape[0]):
                    psi = _apply_expm_taylor(h_stack[k], psi, -1j * h, lam_bound / h)
                start = stop
                continue
            psi = _ordered_product(u_stack) @ psi
            start = stop
        record(i + 1, psi)

    return SimResult(times=t_grid.copy(), observables=series, states=states)


def _liouvillian_static(collapse_ops: list[Operator], dim: int) -> np.ndarray:
    """Dissipator part of the vectorized Liouvillian (row-major vec)."""
    eye = np.eye(dim)
    d_part = np.zeros((dim * dim, dim * dim), dtype=complex)
    for c in collapse_ops:
        c = np.asarray(c, dtype=complex)
        cdc = c.conj().T @ c
        d_part += np.kron(c, c.conj())
        d_part -= 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return d_part


def _liouvillians(h_stack: np.ndarray, d_part: np.ndarray) -> np.ndarray:
    dim = h_stack.shape[-1]
    eye = np.eye(dim)
    left = np.einsum("nab,cd->nacbd", h_stack, eye).reshape(-1, dim * dim, dim * dim)
    right = np.einsum("ab,ncd->nacbd", eye, h_stack.transpose(0, 2, 1)).reshape(
        -1, dim * dim, dim * dim
    )
    return -1j * (left - right) + d_part


def _expm_batch(m_stack: np.ndarray) -> np.ndarray:
    """Batched expm by scaling-and-squaring with a Taylor core."""
    norm = float(np.abs(m_stack).sum(axis=-2).max()) if m_stack.size else 0.0
    squarings = max(0, int(math.ceil(math.log2(max(norm, 1e-30) / 0.25))) if norm > 0.25 else 0)
    scaled = m_stack / (2.0**squarings)
    n_terms = _taylor_terms(min(norm / 2.0**squarings, 0.25) + 0.25)
    dim = m_stack.shape[-1]
    eye = np.broadcast_to(np.eye(dim, dtype=complex), m_stack.shape)
    out = eye + scaled.copy()
    term = scaled
    for j in range(2, n_terms + 1):
        term = (scaled @ term) / j
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def propagate_lindblad(
    hamiltonian,
    rho0: np.ndarray,
    t_grid,
    noise: NoiseModel | None = None,
    space: HilbertSpace | None = None,
    collapse_ops: list[Operator] | None = None,
    observables: dict[str, Operator] | None = None,
    store_states: bool = False,
    step_factor: float = 1.0,
    trace_tol: float = 1e-7,
    psd_floor: float = -1e-7,
    truncation_tol: float = 1e-4,
) -> SimResult:
    """Master-equation evolution of a density matrix along t_grid.

    Collapse operators come from `noise` (requires `space`) or are given
    explicitly.  The stacked-superoperator path keeps the evolution exactly
    trace preserving per substep; trace and positivity are checked at every
    grid point.
    """
    source = as_source(hamiltonian)
    t_grid = _check_grid(t_grid)
    rho = np.asarray(rho0, dtype=complex).copy()
    dim = rho.shape[0]
    if rho.shape != (dim, dim):
        raise EngineError("rho0 must be square")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise EngineError("initial density matrix is not trace one")
    if collapse_ops is None:
        if noise is None:
            collapse_ops = []
        else:
            if space is None:
                raise EngineError("need a HilbertSpace to build collapse operators from a NoiseModel")
            collapse_ops = collapse_operators(noise, space)
    observables = observables or {}
    obs_items = [(name, np.asarray(op, dtype=complex)) for name, op in observables.items()]
    mask = _truncation_mask(space)
    d_part = _liouvillian_static(collapse_ops, dim)

    series = {name: np.empty(len(t_grid)) for name, _ in obs_items}
    states = [] if store_states else None

    def record(i, rho):
        rho = 0.5 * (rho + rho.conj().T)  # shed roundoff skew
        tr = np.trace(rho).real
        if abs(tr - 1.0) > trace_tol:
            raise EngineError(f"trace drift {tr - 1.0:.3e} at t={t_grid[i]:.6g}")
        if dim <= _SMALL_DIM_MAX:
            min_eig = float(np.linalg.eigvalsh(rho).min())
            if min_eig < psd_floor:
                raise EngineError(f"density matrix lost positivity ({min_eig:.3e})")
        if mask is not None:
            top = float(np.real(np.diag(rho)[mask].sum()))
            if top > truncation_tol:
                raise TruncationOverflowError(
                    f"top Fock level population {top:.2e} at t={t_grid[i]:.6g}; enlarge the cavity"
                )
        for name, op in obs_items:
            series[name][i] = np.trace(op @ rho).real
        if states is not None:
            states.append(rho.copy())
        return rho

    rho = record(0, rho)
    use_superop = dim <= _SMALL_DIM_MAX
    vec = rho.reshape(-1)
    for i in range(len(t_grid) - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub, h = _segment_substeps(source, t0, t1, step_factor)
        if use_superop:
            start = 0
            chunk = max(1, _CHUNK_ENTRIES // (dim * dim * dim * dim))
            while start < n_sub:
                stop = min(n_sub, start + chunk)
                mids = t0 + (np.arange(start, stop) + 0.5) * h
                liou = _liouvillians(source(mids), d_part)
                vec = _ordered_product(_expm_batch(liou * h)) @ vec
                start = stop
            rho = vec.reshape(dim, dim)
        else:
            mids = t0 + (np.arange(n_sub) + 0.5) * h
            for k in range(n_sub):
                rho = _lindblad_expm_apply(source(mids[k : k + 1])[0], collapse_ops, rho, h)
        rho = record(i + 1, rho)
        vec = rho.reshape(-1)

    return SimResult(times=t_grid.copy(), observables=series, states=states)


def _lindblad_expm_apply(h: np.ndarray, collapse_ops, rho: np.ndarray, dt: float) -> np.ndarray:
    """exp(L dt) rho via a Taylor series applied functionally (large dims)."""

    def rhs(r):
        out = -1j * (h @ r - r @ h)
        for c in collapse_ops:
            cdc = c.conj().T @ c
            out += c @ r @ c.conj().T - 0.5 * (cdc @ r + r @ cdc)
        return out

    norm_h = float(np.abs(np.linalg.eigvalsh(h)).max())
    rate = sum(float(np.abs(c).max() ** 2) for c in collapse_ops)
    n_terms = _taylor_terms(dt * (2.0 * norm_h + 2.0 * rate) + 0.05)
    acc = rho.copy()
    term = rho
    for j in range(1, n_terms + 1):
        term = (dt / j) * rhs(term)
        acc = acc + term
    return acc


def expectation(state: np.ndarray, op: Operator) -> float:
    """Real expectation value for a state vector or density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        return float(np.vdot(state, op @ state).real)
    return float(np.trace(op @ state).real)


def quasistatic_average(run, sigma: float, n_samples: int, seed: int) -> SimResult:
    """Average a simulation closure over frozen Gaussian detuning offsets.

    `run(offset_mhz)` must return a SimResult on a fixed grid.  Observables
    are averaged pointwise; the draw is deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, sigma, n_samples) if sigma > 0 else np.zeros(n_samples)
    base = None
    acc: dict[str, np.ndarray] = {}
    for off in offsets:
        res = run(float(off))
        if base is None:
            base = res
            acc = {k: v.astype(float).copy() for k, v in res.observables.items()}
        else:
            if len(res.times) != len(base.times) or not np.allclose(res.times, base.times):
                raise EngineError("quasistatic samples returned mismatched time grids")
            for k, v in res.observables.items():
                acc[k] += v
    averaged = {k: v / n_samples for k, v in acc.items()}
    meta = dict(base.meta)
    meta.update({"sigma_quasistatic": sigma, "n_samples": n_samples, "seed": seed})
    return SimResult(times=base.times.copy(), observables=averaged, meta=meta)


def apply_readout_error(p_e, confusion: tuple[float, float]) -> np.ndarray:
    """Map true P(e) through the readout confusion matrix (P(e|g), P(g|e))."""
    p_eg, p_ge = confusion
    p = np.asarray(p_e, dtype=float)
    return p * (1.0 - p_ge) + (1.0 - p) * p_eg


def sample_shots(p_e, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Binomial estimate of probabilities from a finite shot count."""
    p = np.clip(np.asarray(p_e, dtype=float), 0.0, 1.0)
    return rng.binomial(shots, p) / float(shots)


@dataclass
class SweepResult:
    points: list[dict]
    results: list[SimResult | None]
    errors: list[str | None]

    @property
    def ok(self) -> bool:
        return all(e is None for e in self.errors)


def _point_seed(seed: int, point: dict) -> int:
    digest = hashlib.sha256(json.dumps(point, sort_keys=True, default=repr).encode()).digest()
    return int.from_bytes(digest[:8], "big") ^ (seed & 0xFFFFFFFFFFFFFFFF)


def sweep(grid: list[dict], job, seed: int = 0, threads: int = 1) -> SweepResult:
    """Run `job(point, seed)` over a parameter grid, optionally threaded.

    Per-point seeds derive from the point contents, so results do not depend
    on grid ordering or thread scheduling.  Failures are recorded per point
    rather than aborting the sweep.
    """
    grid = list(grid)
    results: list[SimResult | None] = [None] * len(grid)
    errors: list[str | None] = [None] * len(grid)

    def run_one(i):
        try:
            results[i] = job(grid[i], _point_seed(seed, grid[i]))
        except Exception as exc:  # deliberate: sweep reports, caller decides
            errors[i] = f"{type(exc).__name__}: {exc}"

    if threads <= 1:
        for i in range(len(grid)):
            run_one(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_one, range(len(grid))))
    return SweepResult(points=grid, results=results, errors=errors)
