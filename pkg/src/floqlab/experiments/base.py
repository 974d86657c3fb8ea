"""Shared experiment plumbing: configs, grid maps, and engine bridges."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..engine import (NoiseModel, SimResult, apply_readout_error,
                      propagate_lindblad, propagate_unitary, sample_shots)
from ..hamiltonians import DeviceParams, FieldParams
from ..spaces import HilbertSpace
from ..units import angular


class ExperimentError(RuntimeError):
    pass


_BASES = ("bare", "adiabatic")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's full parameterization.

    shots == 1 means exact expectation values; shots > 1 turns on binomial
    sampling followed by the readout confusion matrix. cavity_dim = 0 runs
    bare-qubit models; pump/boost runs need a cavity and use g (defaulting
    to the device boost coupling).
    """

    device: DeviceParams = field(default_factory=DeviceParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    field: FieldParams = field(default_factory=FieldParams)
    basis: str = "bare"
    shots: int = 1
    seed: int = 0
    cavity_dim: int = 0
    g: float | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.basis not in _BASES:
            raise ValueError(f"basis must be one of {_BASES}, got {self.basis!r}")
        if self.cavity_dim < 0:
            raise ValueError("cavity_dim must be >= 0")

    @property
    def coupling(self) -> float:
        return self.device.g_boost if self.g is None else self.g

    def space(self) -> HilbertSpace:
        dims = (self.cavity_dim,) if self.cavity_dim else ()
        return HilbertSpace(qubit_levels=2, cavity_dims=dims)


@dataclass(frozen=True)
class GridMap:
    """2-D scan result: values[i, j] at (rows[i], cols[j])."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    row_label: str
    col_label: str
    value_label: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.rows), len(self.cols)):
            raise ExperimentError(
                f"values shape {self.values.shape} does not match grid "
                f"({len(self.rows)}, {len(self.cols)})")


QUBIT = HilbertSpace(qubit_levels=2)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
PROJ_E = np.diag([1.0, 0.0]).astype(complex)  # basis (|e>, |g>)
GROUND = np.array([0.0, 1.0], dtype=complex)
EXCITED = np.array([1.0, 0.0], dtype=complex)

QUBIT_OBSERVABLES = {"pe": PROJ_E, "sigma_x": SIGMA_X, "sigma_z": SIGMA_Z}


def evolve_qubit(source, t_grid, cfg: ExperimentConfig, psi0=GROUND,
                 observables=None, store_states: bool = False,
                 step_factor: float = 1.0) -> SimResult:
    """Route a two-level evolution through the unitary or Lindblad engine.

    Markovian channels in cfg.noise force the density-matrix path; the
    quasistatic channel is the caller's job (see quasistatic_average).
    """
    obs = QUBIT_OBSERVABLES if observables is None else observables
    state0 = np.asarray(psi0, dtype=complex)
    if cfg.noise.any_markovian:
        rho0 = state0 if state0.ndim == 2 else np.outer(state0, state0.conj())
        return propagate_lindblad(source, rho0, t_grid, noise=cfg.noise,
                                  space=QUBIT, observables=obs,
                                  store_states=store_states,
                                  step_factor=step_factor)
    if state0.ndim != 1:
        raise ExperimentError("state vectors only on the unitary path")
    return propagate_unitary(source, state0, t_grid, observables=obs,
                             store_states=store_states,
                             step_factor=step_factor)


def detuned(source, offset_mhz: float):
    """Source wrapper adding a static z detuning (quasistatic offset)."""
    if offset_mhz == 0.0:
        return source
    shift = 0.5 * angular(offset_mhz) * SIGMA_Z

    def wrapped(times):
        return source(times) + shift

    return wrapped


def measured_pe(pe, cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    """Apply the configured estimator layer to exact P(e) values."""
    pe = np.asarray(pe, dtype=float)
    if cfg.shots > 1:
        pe = sample_shots(pe, cfg.shots, rng)
        pe = apply_readout_error(pe, cfg.noise.readout_error)
    return pe


def with_field(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of cfg with FieldParams fields replaced."""
    return replace(cfg, field=replace(cfg.field, **changes))
