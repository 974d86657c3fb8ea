"""Command-line runner: `floqlab run <cfg>` and `floqlab validate <cfg>`.

Runs are config-driven and deterministic for a fixed seed; every CSV gets
a JSON sidecar holding the resolved config. Exit codes: 0 success, 1
validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import chern_number, pump_rate_estimate, pump_torus
from .config import ConfigError, RunConfig, load_config, resolved_dict, validate_report
from .engine import sweep
from .experiments import (GridMap, adiabatic_basis_following,
                          adiabatic_following, breakdown_boundary,
                          coherence_suite, harmonic_content_map, lz_delay_scan,
                          modulated_chevron, pump_run, rabi_chevron,
                          servo_loop)
from .filters import (precompensation_kernel, ripple_metric,
                      synth_lowpass_kernel)
from .io import write_columns_csv, write_grid_csv, write_sidecar
from .schedules import Waveform


def _axis(spec, name: str) -> np.ndarray:
    """Sweep axis: explicit values, or start/stop/num (log-spaced on log)."""
    if not isinstance(spec, dict):
        raise ConfigError(f"sweep.{name} must be a mapping")
    if "values" in spec:
        return np.asarray(spec["values"], dtype=float)
    try:
        start, stop, num = spec["start"], spec["stop"], int(spec["num"])
    except KeyError as exc:
        raise ConfigError(f"sweep.{name} needs values or start/stop/num") from exc
    if num < 2:
        raise ConfigError(f"sweep.{name}: num must be >= 2")
    if spec.get("log"):
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


def _sweep_axis(rc: RunConfig, name: str, default: dict) -> np.ndarray:
    return _axis(rc.sweep.get(name, default), name)


def _emit_grid(rc: RunConfig, out: Path, stem: str, grid: GridMap,
               extra_meta: dict | None = None) -> list[Path]:
    csv = write_grid_csv(out / f"{stem}.csv", grid, meta=extra_meta)
    side = write_sidecar(csv, resolved_dict(rc), extra={"kind": "grid"})
    return [csv, side]


def _emit_columns(rc: RunConfig, out: Path, stem: str, columns: dict,
                  meta: dict | None = None) -> list[Path]:
    csv = write_columns_csv(out / f"{stem}.csv", columns, meta=meta)
    side = write_sidecar(csv, resolved_dict(rc), extra={"kind": "columns"})
    return [csv, side]


def _run_chevron(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    det = _sweep_axis(rc, "detuning_mhz", {"start": -40.0, "stop": 40.0, "num": 81})
    t = _sweep_axis(rc, "time_us", {"start": 0.0, "stop": 0.5, "num": 201})
    grid = rabi_chevron(cfg, det, t, drive_amp=rc.options.get("drive_amp"))
    return _emit_grid(rc, out, "chevron", grid), []


def _run_modulated_chevron(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    det = _sweep_axis(rc, "detuning_mhz", {"start": -40.0, "stop": 40.0, "num": 81})
    t = _sweep_axis(rc, "time_us", {"start": 0.0, "stop": 1.0, "num": 401})
    grid = modulated_chevron(cfg, float(rc.options.get("omega_mod", rc.field_params.omega_mod)),
                             t, det, drive_amp=rc.options.get("drive_amp"))
    return _emit_grid(rc, out, "modulated_chevron", grid), []


def _run_lz_delay(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    taus = _sweep_axis(rc, "tau_us", {"start": 0.05, "stop": 3.43, "num": 170})
    scan = lz_delay_scan(
        cfg, taus, float(rc.options.get("hidden_delay", 0.3)),
        drive_amp=float(rc.options.get("drive_amp", 30.0)),
        delta=float(rc.options.get("delta", 100.0)),
        programmed_step=float(rc.options.get("programmed_step", 0.25)))
    meta = {"delay_estimate_us": scan.delay_estimate,
            "step_up_us": scan.step_up, "step_down_us": scan.step_down,
            "adiabatic_ok": scan.adiabatic_ok,
            "transfer_estimate": scan.transfer_estimate}
    files = _emit_columns(rc, out, "lz_delay",
                          {"tau_us": scan.taus, "pe": scan.pe}, meta=meta)
    return files, [f"delay estimate {scan.delay_estimate:.4f} us"]


def _run_following_bare(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    res = adiabatic_following(
        cfg, float(rc.options.get("duration", 6.0)),
        measure_axis=str(rc.options.get("measure_axis", "z")),
        dt_record=float(rc.options.get("dt_record", 0.005)),
        n_quasistatic=int(rc.options.get("n_quasistatic", 48)),
        ramp_stage=rc.options.get("ramp_stage"))
    cols = {"time_us": res.times, **res.observables}
    return _emit_columns(rc, out, "following_bare", cols,
                         meta={k: v for k, v in res.meta.items()
                               if k != "markers"}), []


def _run_following_adiabatic(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    if "b0_mhz" in rc.sweep or "omega_mod_mhz" in rc.sweep:
        b0s = _sweep_axis(rc, "b0_mhz", {"start": 2.0, "stop": 80.0,
                                         "num": 9, "log": True})
        oms = _sweep_axis(rc, "omega_mod_mhz",
                          {"values": [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0]})
        fmap = harmonic_content_map(cfg, b0s, oms)
        mean_ratio, ratios = breakdown_boundary(fmap)
        meta = {"boundary_mean_ratio": mean_ratio,
                "boundary_ratios": ratios}
        files = _emit_grid(rc, out, "harmonic_content_map", fmap, meta)
        return files, [f"mean breakdown boundary b0/omega_mod = {mean_ratio:.2f}"]
    durs = _sweep_axis(rc, "duration_us", {"start": 0.07, "stop": 11.97, "num": 171})
    res = adiabatic_basis_following(
        cfg, durs, n_quasistatic=int(rc.options.get("n_quasistatic", 48)),
        ramp_stage=rc.options.get("ramp_stage"))
    return _emit_columns(rc, out, "following_adiabatic",
                         {"duration_us": res.times, "pe": res.column("pe")},
                         meta=res.meta), []


def _run_coherence(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    suite = coherence_suite(cfg)
    files = []
    for leg, trace in suite.traces.items():
        files += _emit_columns(rc, out, f"coherence_{leg}",
                               {"time_us": trace.times, "pe": trace.column("pe")},
                               meta=trace.meta)
    fits = {leg: dataclasses.asdict(fit) for leg, fit in suite.fits.items()}
    files += _emit_columns(
        rc, out, "coherence_fits",
        {"leg": np.array(["t1", "ramsey", "echo", "rabi"]),
         "time_constant_us": np.array([suite.t1_us, suite.t_ramsey_us,
                                       suite.t_echo_us, suite.t_rabi_us])},
        meta={"fits": fits})
    summary = [f"T1 {suite.t1_us:.3f} us, Ramsey {suite.t_ramsey_us:.3f} us, "
               f"echo {suite.t_echo_us:.3f} us, Rabi {suite.t_rabi_us:.3f} us"]
    return files, summary


def _drift_closure(spec: dict):
    kind = str(spec.get("kind", "none"))
    mag = float(spec.get("magnitude_mhz", 0.0))
    t0 = float(spec.get("t_start_s", 0.0))
    if kind == "none":
        return lambda t: 0.0
    if kind == "step":
        return lambda t: mag if t >= t0 else 0.0
    if kind == "ramp":
        t1 = float(spec.get("t_stop_s", t0 + 3600.0))
        if t1 <= t0:
            raise ConfigError("options.drift: t_stop_s must exceed t_start_s")
        return lambda t: mag * float(np.clip((t - t0) / (t1 - t0), 0.0, 1.0))
    raise ConfigError(f"options.drift.kind {kind!r} not one of none/step/ramp")


def _run_servo(rc: RunConfig, out: Path, threads: int):
    trace = servo_loop(rc.servo, _drift_closure(rc.options.get("drift", {})),
                       cadence_s=float(rc.options.get("cadence_s", 30.0)))
    err = trace.error_mhz(rc.servo.omega_target)
    cols = {"time_s": trace.times_s, "omega_ghz": trace.omega_ghz,
            "error_mhz": err, "current_ma": trace.current_ma,
            "step_ma": trace.step_ma}
    files = _emit_columns(rc, out, "servo", cols,
                          meta={"converged": trace.converged,
                                "n_steps": trace.n_steps})
    return files, [f"{trace.n_steps} steps, final error {err[-1]:.3f} MHz"]


def _run_pump(rc: RunConfig, out: Path, threads: int):
    cfg = rc.experiment_config()
    if cfg.cavity_dim <= 0:
        raise ConfigError("pump runs need options.cavity_dim")
    n0 = rc.options.get("n0", 4)
    n_periods = int(rc.options.get("n_periods", 12))
    res = pump_run(cfg, n0, n_periods,
                   points_per_period=int(rc.options.get("points_per_period", 8)),
                   band=str(rc.options.get("band", "upper")),
                   step_factor=float(rc.options.get("step_factor", 2.0)),
                   truncation_tol=float(rc.options.get("truncation_tol", 1e-4)))
    t_window = rc.options.get("slope_window_periods", (1.0, float(n_periods)))
    period = rc.field_params.period
    rate = pump_rate_estimate(res, t_window=(float(t_window[0]) * period,
                                             float(t_window[1]) * period),
                              period=period)
    meta = {"slope_per_us": rate.slope, "slope_stderr": rate.stderr,
            "photons_per_period": rate.slope * period,
            "band": res.meta["band"], "delta_mhz": res.meta["delta_mhz"]}
    files = _emit_columns(rc, out, "pump",
                          {"time_us": res.times, "nbar": res.column("nbar"),
                           "pe": res.column("pe"),
                           "sigma_x": res.column("sigma_x")}, meta=meta)
    snaps = res.meta["fock_periods"]
    grid = GridMap(rows=np.arange(snaps.shape[0], dtype=float),
                   cols=np.arange(snaps.shape[1], dtype=float),
                   values=snaps, row_label="period", col_label="fock_n",
                   value_label="population")
    files += _emit_grid(rc, out, "pump_fock", grid)
    return files, [f"slope {rate.slope * period:+.3f} photons per period"]


def _run_chern_map(rc: RunConfig, out: Path, threads: int):
    b0s = _sweep_axis(rc, "b0_mhz", {"start": 10.0, "stop": 30.0, "num": 5})
    ns = _sweep_axis(rc, "n_photon", {"values": [1.0, 4.0, 9.0, 16.0, 25.0]})
    torus_n = int(rc.options.get("torus_grid", 24))
    doubled = bool(rc.options.get("doubled", False))
    g = float(rc.options.get("g", rc.device.g_boost))
    points = [{"b0": float(b), "n": float(n)} for b in b0s for n in ns]

    def job(point, _seed):
        fp = dataclasses.replace(rc.field_params, b0=point["b0"])
        return chern_number(pump_torus(fp, g, point["n"], torus_n, torus_n,
                                       doubled=doubled))

    result = sweep(points, job, seed=rc.seed, threads=threads)
    values = np.full((len(b0s), len(ns)), np.nan)
    for k, point in enumerate(points):
        if result.errors[k] is None:
            values[k // len(ns), k % len(ns)] = result.results[k]
    grid = GridMap(rows=np.asarray(b0s), cols=np.asarray(ns), values=values,
                   row_label="b0_mhz", col_label="n_photon",
                   value_label="chern_number",
                   meta={"torus_grid": torus_n, "doubled": doubled, "g_mhz": g})
    summary = []
    n_failed = sum(e is not None for e in result.errors)
    if n_failed:
        summary.append(f"{n_failed}/{len(points)} points failed "
                       "(gap closure); emitted as nan")
    return _emit_grid(rc, out, "chern_map", grid), summary


def _run_filter_demo(rc: RunConfig, out: Path, threads: int):
    cutoff = float(rc.options.get("cutoff_mhz", 6.0))
    width = float(rc.options.get("pulse_width_us", 1.0))
    start = float(rc.options.get("pulse_start_us", 1.0))
    window = rc.options.get("flat_window_us",
                            (start + 0.2 * width, start + 0.8 * width))
    dt = 1e-3
    n_total = int(round((2.0 * start + width) / dt))
    samples = np.zeros(n_total)
    i0 = int(round(start / dt))
    samples[i0:i0 + int(round(width / dt))] = 1.0
    pulse = Waveform(dt=dt, samples=samples, t0=0.0)
    kernel = synth_lowpass_kernel(cutoff, dt=dt)
    from .filters import convolve
    raw = convolve(pulse, kernel)
    comp = convolve(convolve(pulse, precompensation_kernel(kernel)), kernel)
    r_raw = ripple_metric(raw, tuple(window))
    r_comp = ripple_metric(comp, tuple(window))
    # raw and comp carry different residual t0; resample on the pulse grid
    t_common = pulse.times
    cols = {"time_us": t_common, "input": pulse.samples,
            "raw": raw.value(t_common), "precompensated": comp.value(t_common)}
    meta = {"ripple_raw": r_raw, "ripple_precompensated": r_comp,
            "ripple_ratio": r_comp / r_raw, "cutoff_mhz": cutoff,
            "flat_window_us": list(window)}
    files = _emit_columns(rc, out, "filter_demo", cols, meta=meta)
    return files, [f"ripple ratio {r_comp / r_raw:.3f}"]


_RUNNERS = {
    "chevron": _run_chevron,
    "modulated_chevron": _run_modulated_chevron,
    "lz_delay": _run_lz_delay,
    "following_bare": _run_following_bare,
    "following_adiabatic": _run_following_adiabatic,
    "coherence": _run_coherence,
    "servo": _run_servo,
    "pump": _run_pump,
    "chern_map": _run_chern_map,
    "filter_demo": _run_filter_demo,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqlab", description="config-driven simulation runs")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config", help="path to a YAML run config")
    run_p.add_argument("--out", help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, help="seed override")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweep-style experiments")
    run_p.add_argument("--print-params", action="store_true",
                       help="echo the resolved parameters before running")
    val_p = sub.add_parser("validate", help="validate a config and report")
    val_p.add_argument("config", help="path to a YAML run config")
    return parser


def _cmd_run(args) -> int:
    try:
        rc = load_config(args.config)
        if args.seed is not None:
            rc = dataclasses.replace(rc, seed=args.seed)
        if args.out is not None:
            rc = dataclasses.replace(rc, output=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.print_params:
        print(json.dumps(resolved_dict(rc), indent=2, sort_keys=True))
    out = Path(rc.output)
    try:
        files, summary = _RUNNERS[rc.experiment](rc, out, max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for line in summary:
        print(line)
    for f in files:
        print(f"wrote {f}")
    return 0


def _cmd_validate(args) -> int:
    report = validate_report(args.config)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if not report["errors"] else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
