"""Run configuration: YAML parsing, field validation, resolved defaults.

A run document names one experiment, a mandatory seed, an output
directory, and optional device/noise/field/servo sections whose field
names match the parameter dataclasses. Sweep ranges and per-experiment
knobs live under `sweep` and `options`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .engine import NoiseModel
from .experiments.base import ExperimentConfig
from .experiments.servo import ServoConfig
from .hamiltonians import DeviceParams, FieldParams

EXPERIMENTS = ("chevron", "modulated_chevron", "lz_delay", "following_bare",
               "following_adiabatic", "coherence", "servo", "pump",
               "chern_map", "filter_demo")

_TOP_KEYS = {"experiment", "seed", "output", "device", "noise", "field",
             "servo", "sweep", "options", "shots"}
_TUPLE_FIELDS = {"readout_error", "omega_q_range"}
_HIERARCHY_FACTOR = 3.0


class ConfigError(ValueError):
    """Config rejected; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    seed: int
    output: str = "runs"
    device: DeviceParams = field(default_factory=DeviceParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    field_params: FieldParams = field(default_factory=FieldParams)
    servo: ServoConfig | None = None
    shots: int = 1
    sweep: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def experiment_config(self) -> ExperimentConfig:
        """Bridge into the runner-facing config object."""
        return ExperimentConfig(
            device=self.device, noise=self.noise, field=self.field_params,
            shots=self.shots, seed=self.seed,
            cavity_dim=int(self.options.get("cavity_dim", 0)),
            g=self.options.get("g"))


def _build_section(name: str, cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"{name} section must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {sorted(unknown)}")
    clean = {k: tuple(v) if k in _TUPLE_FIELDS and isinstance(v, list) else v
             for k, v in data.items()}
    try:
        return cls(**clean)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a YAML (or JSON sidecar) run document."""
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a mapping")
    raw = {k: v for k, v in raw.items() if not str(k).startswith("__")}
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    if "experiment" not in raw:
        raise ConfigError("experiment is required")
    experiment = str(raw["experiment"])
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    if "seed" not in raw:
        raise ConfigError("seed is required")
    try:
        seed = int(raw["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed: {exc}") from exc
    shots = int(raw.get("shots", 1))
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    sweep = raw.get("sweep") or {}
    options = raw.get("options") or {}
    for name, sec in (("sweep", sweep), ("options", options)):
        if not isinstance(sec, dict):
            raise ConfigError(f"{name} section must be a mapping")
    servo = None
    if raw.get("servo") is not None:
        servo = _build_section("servo", ServoConfig, raw["servo"])
    elif experiment == "servo":
        raise ConfigError("servo experiment needs a servo section")
    return RunConfig(
        experiment=experiment,
        seed=seed,
        output=str(raw.get("output", "runs")),
        device=_build_section("device", DeviceParams, raw.get("device") or {}),
        noise=_build_section("noise", NoiseModel, raw.get("noise") or {}),
        field_params=_build_section("field", FieldParams, raw.get("field") or {}),
        servo=servo,
        shots=shots,
        sweep=dict(sweep),
        options=dict(options),
    )


def resolved_dict(rc: RunConfig) -> dict:
    """Full config with defaults materialized; loadable as a config again."""
    out = {
        "experiment": rc.experiment,
        "seed": rc.seed,
        "output": rc.output,
        "shots": rc.shots,
        "device": dataclasses.asdict(rc.device),
        "noise": dataclasses.asdict(rc.noise),
        "field": dataclasses.asdict(rc.field_params),
        "sweep": dict(rc.sweep),
        "options": dict(rc.options),
    }
    if rc.servo is not None:
        out["servo"] = dataclasses.asdict(rc.servo)
    return out


def _hierarchy_warnings(rc: RunConfig) -> list[str]:
    """Operating-regime ordering: delta, omega_mod << b0, g*sqrt(n) << alpha."""
    fp = rc.field_params
    warns = []
    slows = [("delta", fp.delta_resolved), ("omega_mod", fp.omega_mod)]
    fasts = [("b0", fp.b0)]
    g = rc.options.get("g", rc.device.g_boost)
    n0 = rc.options.get("n0")
    if rc.experiment == "pump" and n0 is not None:
        n_max = max(_fock_labels(n0))
        fasts.append(("g*sqrt(n)", float(g) * float(np.sqrt(max(n_max, 1)))))
    for sname, sval in slows:
        for fname, fval in fasts:
            if _HIERARCHY_FACTOR * sval > fval:
                warns.append(
                    f"hierarchy: {sname}={sval:g} MHz is not well below "
                    f"{fname}={fval:g} MHz")
    for fname, fval in fasts:
        if _HIERARCHY_FACTOR * fval > rc.device.alpha:
            warns.append(
                f"hierarchy: {fname}={fval:g} MHz is not well below "
                f"alpha={rc.device.alpha:g} MHz")
    return warns


def _fock_labels(n0) -> list[int]:
    if isinstance(n0, (int, np.integer)):
        return [int(n0)]
    return [int(k) for k in dict(n0)]


def _truncation_warnings(rc: RunConfig) -> list[str]:
    dim = int(rc.options.get("cavity_dim", 0))
    n0 = rc.options.get("n0")
    if dim <= 0 or n0 is None:
        return []
    n_top = max(_fock_labels(n0)) + int(rc.options.get("n_periods", 0))
    headroom = dim - 1 - n_top
    if headroom < 4:
        return [f"truncation: cavity_dim={dim} leaves only {headroom} levels "
                f"above the walked range (top ~ {n_top}); enlarge the cavity"]
    return []


def validate_report(path) -> dict:
    """Machine-readable validation: errors, warnings, resolved defaults."""
    try:
        rc = load_config(path)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        return {"errors": [str(exc)], "warnings": [], "resolved": None}
    warnings = _hierarchy_warnings(rc) + _truncation_warnings(rc)
    return {"errors": [], "warnings": warnings, "resolved": resolved_dict(rc)}
