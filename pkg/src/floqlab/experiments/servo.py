"""Slow frequency servo holding the qubit on target against drift.

The plant is a scalar map: measured frequency = target + drift(t) +
A * I, with A the bias-current-to-frequency scale. Each step measures,
computes the required correction (target - measured)/A, clips it to the
per-step current cap, and applies it. The loop always runs a minimum
number of steps and is bounded by a maximum count, so it terminates for
any drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ExperimentError


@dataclass(frozen=True)
class ServoConfig:
    """Loop constants: target in GHz, scale in GHz/mA, tolerance in MHz."""

    omega_target: float
    scale_a: float
    i_cap: float
    delta_freq: float
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.n_min < 1 or self.n_min > self.n_max:
            raise ExperimentError("need 1 <= n_min <= n_max")
        if self.delta_freq <= 0:
            raise ExperimentError("delta_freq must be positive")
        if self.i_cap <= 0:
            raise ExperimentError("i_cap must be positive")
        if self.scale_a == 0:
            raise ExperimentError("scale_a must be nonzero")


@dataclass(frozen=True)
class ServoTrace:
    """Per-step record: measured frequency, post-step current, applied step."""

    times_s: np.ndarray
    omega_ghz: np.ndarray
    current_ma: np.ndarray
    step_ma: np.ndarray
    converged: bool

    @property
    def n_steps(self) -> int:
        return len(self.times_s)

    def error_mhz(self, omega_target: float) -> np.ndarray:
        return 1e3 * (self.omega_ghz - omega_target)


def servo_loop(servo: ServoConfig, drift, cadence_s: float = 30.0) -> ServoTrace:
    """Run the servo against a drift closure (seconds -> offset in MHz).

    Stops once at least n_min steps have run and the measured frequency
    is within delta_freq of target, or after n_max steps. The measurement
    at each step is taken before that step's correction is applied.
    """
    tol_ghz = 1e-3 * servo.delta_freq
    times, omegas, currents, steps = [], [], [], []
    current = 0.0
    converged = False
    for k in range(1, servo.n_max + 1):
        t = (k - 1) * cadence_s
        omega = servo.omega_target + 1e-3 * float(drift(t)) + servo.scale_a * current
        err = servo.omega_target - omega
        step = float(np.clip(err / servo.scale_a, -servo.i_cap, servo.i_cap))
        current += step
        times.append(t)
        omegas.append(omega)
        currents.append(current)
        steps.append(step)
        if k >= servo.n_min and abs(err) < tol_ghz:
            converged = True
            break
    return ServoTrace(times_s=np.array(times), omega_ghz=np.array(omegas),
                      current_ma=np.array(currents), step_ma=np.array(steps),
                      converged=converged)
