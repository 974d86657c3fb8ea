"""Measurement-style experiment drivers built on the engine and schedules."""

from .base import (EXCITED, GROUND, PROJ_E, QUBIT, QUBIT_OBSERVABLES, SIGMA_X,
                   SIGMA_Y, SIGMA_Z, ExperimentConfig, ExperimentError,
                   GridMap, detuned, evolve_qubit, measured_pe, with_field)
from .chevrons import modulated_chevron, rabi_chevron
from .coherence import (CoherenceResult, coherence_suite, echo_trace,
                        rabi_jitter_trace, ramsey_trace, relaxation_trace)
from .following import (adiabatic_basis_following, adiabatic_following,
                        bloch_field_angle, breakdown_boundary,
                        harmonic_content_map, phase_lag)
from .lz import DelayScan, lz_delay_scan
from .pump import band_shift, band_state, boost_fidelity, pump_run
from .servo import ServoConfig, ServoTrace, servo_loop

__all__ = [
    "EXCITED", "GROUND", "PROJ_E", "QUBIT", "QUBIT_OBSERVABLES", "SIGMA_X",
    "SIGMA_Y", "SIGMA_Z", "ExperimentConfig", "ExperimentError", "GridMap",
    "detuned", "evolve_qubit", "measured_pe", "with_field",
    "modulated_chevron", "rabi_chevron",
    "CoherenceResult", "coherence_suite", "echo_trace", "rabi_jitter_trace",
    "ramsey_trace", "relaxation_trace",
    "adiabatic_basis_following", "adiabatic_following", "bloch_field_angle",
    "breakdown_boundary", "harmonic_content_map", "phase_lag",
    "DelayScan", "lz_delay_scan",
    "band_shift", "band_state", "boost_fidelity", "pump_run",
    "ServoConfig", "ServoTrace", "servo_loop",
]
