"""Coherence characterization: relaxation, Ramsey, Hahn echo, driven Rabi.

Pulses are ideal instantaneous rotations; only the idle (or driven)
segments evolve under the configured noise channels. Each leg targets the
channel it is sensitive to: populations relax with 1/T1, Ramsey fringes
collapse under the quasistatic spread, the echo removes static offsets
and exposes the Markovian dephasing rate, and the Rabi envelope tracks
drive-amplitude jitter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..analysis import FitError, fit_exponential, fit_gaussian_envelope
from ..engine import NoiseModel, SimResult, quasistatic_average
from ..units import angular
from .base import (EXCITED, GROUND, PROJ_E, SIGMA_X, SIGMA_Z,
                   ExperimentConfig, ExperimentError, evolve_qubit)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


_HALF_PI = _ry(np.pi / 2.0)


def _pe_after(state: np.ndarray, gate: np.ndarray) -> float:
    """P(e) after applying a gate to a ket or density matrix."""
    if state.ndim == 1:
        return float(np.abs((gate @ state)[0]) ** 2)
    rho = gate @ state @ gate.conj().T
    return float(np.trace(PROJ_E @ rho).real)


def _leg_fit(leg: str, fitter, times, values):
    try:
        return fitter(times, values)
    except FitError as exc:
        raise ExperimentError(f"{leg} fit did not converge: {exc}") from exc


def relaxation_trace(cfg: ExperimentConfig, span: float = 40.0,
                     n_points: int = 81) -> SimResult:
    """P(e)(t) from |e> with the fields off."""
    t = np.linspace(0.0, span, n_points)
    idle = np.zeros((2, 2), dtype=complex)
    return evolve_qubit(idle, t, cfg, psi0=EXCITED,
                        observables={"pe": PROJ_E})


def ramsey_trace(cfg: ExperimentConfig, f_virtual: float = 3.0,
                 span: float = 1.8, n_points: int = 181,
                 n_quasistatic: int = 64) -> SimResult:
    """Ramsey fringes with a virtual-phase second pi/2 pulse.

    The second pulse's phase advances as 2*pi*f_virtual*t, so the fringe
    oscillates at f_virtual even on resonance. Quasistatic offsets are
    averaged over; their Gaussian spread sets the envelope collapse.
    """
    t = np.linspace(0.0, span, n_points)
    psi0 = _HALF_PI @ GROUND
    phases = angular(f_virtual) * t

    def run(offset_mhz):
        h = 0.5 * angular(offset_mhz) * SIGMA_Z
        res = evolve_qubit(h, t, cfg, psi0=psi0, observables={},
                           store_states=True)
        pe = np.empty(len(t))
        for k, state in enumerate(res.states):
            half = np.exp(-0.5j * phases[k])
            rz = np.diag([half, half.conjugate()])
            pe[k] = _pe_after(state, _HALF_PI @ rz)
        return SimResult(times=t.copy(), observables={"pe": pe})

    sigma = cfg.noise.sigma_quasistatic
    n = n_quasistatic if sigma > 0 else 1
    res = quasistatic_average(run, sigma, n, cfg.seed)
    res.meta.update(f_virtual_mhz=f_virtual)
    return res


def echo_trace(cfg: ExperimentConfig, span: float = 9.0,
               n_points: int = 45) -> SimResult:
    """Hahn echo: pi/2 - tau/2 - X pi - tau/2 - pi/2, P(e) vs tau.

    Static z offsets refocus exactly (they commute with the decay
    channels), so no quasistatic averaging is needed; the envelope decays
    at the Markovian rate 1/(2 T1) + 1/Tphi. The final pulse maps the
    refocused coherence onto sigma_z, which keeps relaxation-induced
    population drift out of the measured P(e).
    """
    taus = np.linspace(span / n_points, span, n_points)
    psi0 = _HALF_PI @ GROUND
    idle = np.zeros((2, 2), dtype=complex)
    pe = np.empty(len(taus))
    for i, tau in enumerate(taus):
        seg = np.array([0.0, 0.5 * tau])
        first = evolve_qubit(idle, seg, cfg, psi0=psi0, observables={},
                             store_states=True)
        mid = first.states[-1]
        if mid.ndim == 1:
            mid = SIGMA_X @ mid
        else:
            mid = SIGMA_X @ mid @ SIGMA_X
        second = evolve_qubit(idle, seg, cfg, psi0=mid, observables={},
                              store_states=True)
        pe[i] = _pe_after(second.states[-1], _HALF_PI)
    return SimResult(times=taus, observables={"pe": pe})


def rabi_jitter_trace(cfg: ExperimentConfig, omega_rabi: float = 10.0,
                      rel_jitter: float = 0.01, span: float = 4.0,
                      n_points: int = 401, n_samples: int = 64) -> SimResult:
    """Resonant Rabi oscillation averaged over drive-amplitude jitter.

    The drive amplitude is drawn per shot from a Gaussian of relative
    width rel_jitter, which collapses the fringe contrast under a
    Gaussian envelope. Markovian channels are left out: this leg checks
    the control-amplitude spread alone.
    """
    t = np.linspace(0.0, span, n_points)
    quiet = replace(cfg, noise=NoiseModel())
    rng = np.random.default_rng([cfg.seed, 2])
    scales = rng.normal(1.0, rel_jitter, n_samples)
    pe = np.zeros(len(t))
    for s in scales:
        h = 0.5 * angular(omega_rabi * s) * SIGMA_X
        res = evolve_qubit(h, t, quiet, observables={"pe": PROJ_E})
        pe += res.column("pe")
    out = SimResult(times=t, observables={"pe": pe / n_samples})
    out.meta.update(omega_rabi_mhz=omega_rabi, rel_jitter=rel_jitter)
    return out


@dataclass(frozen=True)
class CoherenceResult:
    """Fitted time scales (us) with the per-leg traces and fit objects."""

    t1_us: float
    t_ramsey_us: float
    t_echo_us: float
    t_rabi_us: float
    fits: dict
    traces: dict


def coherence_suite(cfg: ExperimentConfig) -> CoherenceResult:
    """Run all four legs and fit their decay scales.

    Relaxation and echo fit a*exp(-t/tau)+c; Ramsey and Rabi fit a
    Gaussian-envelope fringe. Fit non-convergence surfaces as
    ExperimentError naming the leg.
    """
    if cfg.noise.t1 is None:
        raise ExperimentError("coherence suite needs a relaxation time in the noise model")
    traces = {
        "t1": relaxation_trace(cfg),
        "ramsey": ramsey_trace(cfg),
        "echo": echo_trace(cfg),
        "rabi": rabi_jitter_trace(cfg),
    }
    fits = {
        "t1": _leg_fit("t1", fit_exponential, traces["t1"].times,
                       traces["t1"].column("pe")),
        "ramsey": _leg_fit("ramsey", fit_gaussian_envelope,
                           traces["ramsey"].times, traces["ramsey"].column("pe")),
        "echo": _leg_fit("echo", fit_exponential, traces["echo"].times,
                         traces["echo"].column("pe")),
        "rabi": _leg_fit("rabi", fit_gaussian_envelope,
                         traces["rabi"].times, traces["rabi"].column("pe")),
    }
    if not fits["t1"].identifiable:
        raise ExperimentError("relaxation trace shows no decay")
    return CoherenceResult(
        t1_us=fits["t1"].tau,
        t_ramsey_us=fits["ramsey"].tau_g,
        t_echo_us=fits["echo"].tau,
        t_rabi_us=fits["rabi"].tau_g,
        fits=fits,
        traces=traces,
    )
