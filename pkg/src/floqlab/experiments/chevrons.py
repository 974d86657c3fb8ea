"""Rabi chevron maps with constant and modulated drive amplitude."""

from __future__ import annotations

import numpy as np

from ..hamiltonians import qubit_field_source
from ..units import angular
from .base import (PROJ_E, ExperimentConfig, ExperimentError, GridMap,
                   evolve_qubit, measured_pe)


def rabi_chevron(cfg: ExperimentConfig, detuning_grid, t_grid,
                 drive_amp: float | None = None) -> GridMap:
    """P(e) vs (time, detuning) under a constant drive of amplitude Omega.

    The drive amplitude defaults to the configured field strength b0. Each
    detuning column is an independent evolution from |g>; on resonance the
    column oscillates at Omega with unit contrast when noise is off.
    """
    omega = cfg.field.b0 if drive_amp is None else drive_amp
    if omega <= 0:
        raise ExperimentError("drive amplitude must be positive")
    detuning_grid = np.asarray(detuning_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    rng = np.random.default_rng(cfg.seed)

    pe = np.empty((len(t_grid), len(detuning_grid)))
    for j, delta in enumerate(detuning_grid):
        source = qubit_field_source(lambda t: np.full_like(t, omega),
                                    lambda t, d=delta: np.full_like(t, d))
        res = evolve_qubit(source, t_grid, cfg, observables={"pe": PROJ_E})
        pe[:, j] = measured_pe(res.column("pe"), cfg, rng)
    return GridMap(rows=t_grid, cols=detuning_grid, values=pe,
                   row_label="time_us", col_label="detuning_mhz",
                   value_label="pe", meta={"drive_amp_mhz": omega})


def modulated_chevron(cfg: ExperimentConfig, omega_mod: float, t_grid,
                      detuning_grid, drive_amp: float | None = None) -> GridMap:
    """Chevron with the drive envelope Omega0 cos(omega_mod t).

    The qubit dynamics freeze where the envelope crosses zero (t = T/4 and
    3T/4 for a cosine), restarting with the opposite rotation sense.
    """
    omega0 = cfg.field.b0 if drive_amp is None else drive_amp
    if omega0 <= 0 or omega_mod <= 0:
        raise ExperimentError("drive amplitude and omega_mod must be positive")
    detuning_grid = np.asarray(detuning_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    w = angular(omega_mod)

    pe = np.empty((len(t_grid), len(detuning_grid)))
    for j, delta in enumerate(detuning_grid):
        source = qubit_field_source(lambda t: omega0 * np.cos(w * t),
                                    lambda t, d=delta: np.full_like(t, d))
        res = evolve_qubit(source, t_grid, cfg, observables={"pe": PROJ_E})
        pe[:, j] = measured_pe(res.column("pe"), cfg, rng)
    return GridMap(rows=t_grid, cols=detuning_grid, values=pe,
                   row_label="time_us", col_label="detuning_mhz",
                   value_label="pe",
                   meta={"drive_amp_mhz": omega0, "omega_mod_mhz": omega_mod})
