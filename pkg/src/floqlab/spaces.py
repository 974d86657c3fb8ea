"""Composite Hilbert spaces and elementary operators.

A space is one qubit-like subsystem (2-level or a truncated transmon ladder)
tensored with zero or more truncated cavity modes, qubit factor first.

Basis ordering: for a 2-level qubit the excited state comes first, so
sigma_z|e> = +|e>.  For a transmon ladder (>= 3 levels) the basis is ascending
|0>, |1>, ... with |0> the ground state.  Cavity modes use ascending Fock
states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Operator = np.ndarray  # dense complex matrix on the full space
StateVector = np.ndarray

_QUBIT_KINDS = frozenset(
    {"identity", "sigma_x", "sigma_y", "sigma_z", "sigma_plus", "sigma_minus", "drive"}
)
_CAVITY_KINDS = frozenset({"identity", "a", "adag", "number"})


class SpaceError(ValueError):
    """Raised for invalid space definitions or operator requests."""


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor-product space: qubit factor first, then cavity modes."""

    qubit_levels: int = 2
    cavity_dims: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.qubit_levels < 2:
            raise SpaceError(f"qubit_levels must be >= 2, got {self.qubit_levels}")
        object.__setattr__(self, "cavity_dims", tuple(int(d) for d in self.cavity_dims))
        if any(d < 2 for d in self.cavity_dims):
            raise SpaceError(f"cavity dimensions must be >= 2, got {self.cavity_dims}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.qubit_levels, *self.cavity_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_cavities(self) -> int:
        return len(self.cavity_dims)

    def qubit_level_index(self, level) -> int:
        """Basis index of a qubit energy level ('g'/'e' or integer level)."""
        if isinstance(level, str):
            try:
                level = {"g": 0, "e": 1}[level]
            except KeyError:
                raise SpaceError(f"unknown qubit label {level!r}") from None
        level = int(level)
        if not 0 <= level < self.qubit_levels:
            raise SpaceError(f"qubit level {level} outside 0..{self.qubit_levels - 1}")
        if self.qubit_levels == 2:
            return 1 - level  # (|e>, |g>) ordering
        return level

    def embed(self, matrix: np.ndarray, subsystem: int) -> Operator:
        """Tensor a single-subsystem matrix with identities on the rest.

        subsystem 0 is the qubit, 1..n are the cavities.
        """
        dims = self.dims
        if not 0 <= subsystem < len(dims):
            raise SpaceError(f"subsystem {subsystem} outside 0..{len(dims) - 1}")
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (dims[subsystem], dims[subsystem]):
            raise SpaceError(
                f"matrix shape {matrix.shape} does not match subsystem dim {dims[subsystem]}"
            )
        out = np.array([[1.0 + 0.0j]])
        for k, d in enumerate(dims):
            out = np.kron(out, matrix if k == subsystem else np.eye(d))
        return out

    def basis_state(self, qubit="g", fock: tuple[int, ...] = ()) -> StateVector:
        """Product basis state |qubit> x |fock...> as a normalized vector."""
        fock = tuple(fock)
        if len(fock) != self.n_cavities:
            raise SpaceError(
                f"need {self.n_cavities} Fock labels, got {len(fock)}"
            )
        idx = self.qubit_level_index(qubit)
        for n, d in zip(fock, self.cavity_dims):
            if not 0 <= n < d:
                raise SpaceError(f"Fock label {n} outside cavity dim {d}")
            idx = idx * d + n
        psi = np.zeros(self.dim, dtype=complex)
        psi[idx] = 1.0
        return psi

    def top_level_projector(self, cavity: int = 0) -> Operator:
        """Projector onto the highest Fock state of one cavity (truncation guard)."""
        d = self.cavity_dims[cavity]
        proj = np.zeros((d, d))
        proj[d - 1, d - 1] = 1.0
        return self.embed(proj, cavity + 1)


def _qubit_matrix(levels: int, kind: str) -> np.ndarray:
    if levels == 2:
        # basis (|e>, |g>)
        mats = {
            "identity": np.eye(2),
            "sigma_x": np.array([[0.0, 1.0], [1.0, 0.0]]),
            "sigma_y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
            "sigma_z": np.diag([1.0, -1.0]),
            "sigma_plus": np.array([[0.0, 1.0], [0.0, 0.0]]),   # |e><g|
            "sigma_minus": np.array([[0.0, 0.0], [1.0, 0.0]]),  # |g><e|
        }
        mats["drive"] = mats["sigma_x"]
        return mats[kind]
    # ascending ladder |0>, |1>, ...
    m = np.zeros((levels, levels), dtype=complex)
    if kind == "identity":
        return np.eye(levels)
    if kind == "drive":
        for j in range(levels - 1):
            m[j, j + 1] = np.sqrt(j + 1.0)
        return m + m.conj().T
    if kind == "sigma_plus":
        m[1, 0] = 1.0
        return m
    if kind == "sigma_minus":
        m[0, 1] = 1.0
        return m
    if kind == "sigma_x":
        m[0, 1] = m[1, 0] = 1.0
        return m
    if kind == "sigma_y":
        m[1, 0] = 1.0j
        m[0, 1] = -1.0j
        return m
    if kind == "sigma_z":
        m[1, 1] = 1.0
        m[0, 0] = -1.0
        return m
    raise SpaceError(f"unknown qubit operator kind {kind!r}")


def _cavity_matrix(dim: int, kind: str) -> np.ndarray:
    if kind == "identity":
        return np.eye(dim)
    a = np.diag(np.sqrt(np.arange(1.0, dim)), k=1)
    if kind == "a":
        return a
    if kind == "adag":
        return a.conj().T
    if kind == "number":
        return np.diag(np.arange(float(dim)))
    raise SpaceError(f"unknown cavity operator kind {kind!r}")


def build_elementary(space: HilbertSpace, kind: str, subsystem: int = 0) -> Operator:
    """Elementary operator embedded in the full space.

    Qubit kinds (subsystem 0): identity, sigma_x/y/z, sigma_plus/minus, drive
    (the sqrt(j+1)-weighted multi-level generalization of sigma_x).
    Cavity kinds (subsystem >= 1): identity, a, adag, number.
    """
    if subsystem == 0:
        if kind not in _QUBIT_KINDS:
            raise SpaceError(f"operator kind {kind!r} not defined on the qubit")
        return space.embed(_qubit_matrix(space.qubit_levels, kind), 0)
    if kind not in _CAVITY_KINDS:
        raise SpaceError(f"operator kind {kind!r} not defined on a cavity")
    if not 1 <= subsystem <= space.n_cavities:
        raise SpaceError(f"no cavity at subsystem index {subsystem}")
    return space.embed(_cavity_matrix(space.cavity_dims[subsystem - 1], kind), subsystem)


def assert_hermitian(op: Operator, tol: float = 1e-12, scale: float | None = None):
    """Raise if op deviates from Hermiticity beyond tol (relative to scale)."""
    op = np.asarray(op)
    if scale is None:
        scale = max(1.0, float(np.abs(op).max()))
    defect = float(np.abs(op - op.conj().T).max())
    if defect > tol * scale:
        raise SpaceError(f"operator is not Hermitian (defect {defect:.3e})")
