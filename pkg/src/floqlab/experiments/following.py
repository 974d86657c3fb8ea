"""Adiabatic-following experiments in the bare and field-eigenstate bases.

The qubit starts in |g>, is ramped onto the instantaneous field eigenstate,
and rides the rotating field for a programmable duration. The bare-basis
variant shuts the channels off fast and records Bloch components; the
eigenbasis variant ramps the field out so band populations map onto
|g>/|e> before readout.
"""

from __future__ import annotations

import numpy as np

from ..analysis import fractional_harmonic_content, power_spectrum
from ..engine import SimResult, quasistatic_average
from ..hamiltonians import field_vector
from ..schedules import (chain, elliptic_field, ramp_in, ramp_out,
                         schedule_source, staged_shutoff)
from .base import (PROJ_E, SIGMA_X, SIGMA_Y, SIGMA_Z, ExperimentConfig,
                   ExperimentError, GridMap, detuned, evolve_qubit,
                   measured_pe, with_field)

BLOCH_OBSERVABLES = {"pe": PROJ_E, "sigma_x": SIGMA_X, "sigma_y": SIGMA_Y,
                     "sigma_z": SIGMA_Z}


def _averaged(run, cfg: ExperimentConfig, n_quasistatic: int) -> SimResult:
    sigma = cfg.noise.sigma_quasistatic
    if sigma > 0 and n_quasistatic > 1:
        return quasistatic_average(run, sigma, n_quasistatic, cfg.seed)
    return run(0.0)


def adiabatic_following(cfg: ExperimentConfig, duration: float,
                        measure_axis: str = "z", dt_record: float = 0.005,
                        n_quasistatic: int = 48, step_factor: float = 1.0,
                        ramp_stage: float | None = None) -> SimResult:
    """Ride the rotating field and record bare-basis Bloch components.

    The composite schedule is ramp-in, rotation for `duration`, then a
    staged shutoff that leaves residual precession about the measured axis.
    Under good following <sigma_x> tracks the x field component and
    <sigma_z> the z component, a quarter period behind it.
    """
    if measure_axis not in ("x", "z"):
        raise ExperimentError(f"measure_axis must be 'x' or 'z', got {measure_axis!r}")
    if duration <= 0:
        raise ExperimentError("duration must be positive")
    fp = cfg.field
    fx, fz = field_vector(fp, duration)
    sched = chain(ramp_in(fp, stage=ramp_stage), elliptic_field(fp, duration),
                  staged_shutoff(measure_axis, float(fx), float(fz)))
    source = schedule_source(sched)
    n = int(round(sched.duration / dt_record))
    t_grid = np.arange(n + 1) * dt_record

    def run(offset_mhz):
        return evolve_qubit(detuned(source, offset_mhz), t_grid, cfg,
                            observables=BLOCH_OBSERVABLES,
                            step_factor=step_factor)

    res = _averaged(run, cfg, n_quasistatic)
    res.meta.update(markers=dict(sched.markers), duration_us=duration,
                    measure_axis=measure_axis, b0_mhz=fp.b0, m=fp.m,
                    omega_mod_mhz=fp.omega_mod)
    return res


def _rotation_window(result: SimResult, window):
    times = result.times
    if window is None:
        marks = result.meta.get("markers", {})
        window = (marks.get("rotation_start", times[0]),
                  marks.get("rotation_end", times[-1]))
    sel = (times >= window[0]) & (times <= window[1])
    if sel.sum() < 4:
        raise ExperimentError("analysis window holds fewer than 4 samples")
    return sel, window


def phase_lag(result: SimResult, period: float, lead: str = "sigma_x",
              trail: str = "sigma_z", window=None) -> float:
    """Delay (us) by which `lead` anticipates `trail` inside the rotation
    window, from the cross-correlation peak over lags in [0, period/2]."""
    sel, _ = _rotation_window(result, window)
    times = result.times[sel]
    a = result.column(lead)[sel]
    b = result.column(trail)[sel]
    a = a - a.mean()
    b = b - b.mean()
    dt = float(times[1] - times[0])
    kmax = int(round(0.5 * period / dt))
    if kmax >= len(a):
        raise ExperimentError("window too short for the requested period")
    scores = np.array([np.dot(a[:len(a) - k], b[k:]) for k in range(kmax + 1)])
    scores /= (len(a) - np.arange(kmax + 1))
    return float(np.argmax(scores) * dt)


def bloch_field_angle(result: SimResult, fp=None, window=None) -> np.ndarray:
    """Angle (rad) between the Bloch vector and the instantaneous field
    direction over the rotation window. Zero for perfect upper-band
    following; pi for the lower band."""
    sel, window = _rotation_window(result, window)
    t_local = result.times[sel] - window[0]
    if fp is None:
        raise ExperimentError("field parameters required")
    bx, bz = field_vector(fp, t_local)
    bnorm = np.hypot(bx, bz)
    if np.any(bnorm < 1e-12):
        raise ExperimentError("field magnitude vanishes inside the window")
    v = np.stack([result.column("sigma_x")[sel],
                  result.column("sigma_y")[sel],
                  result.column("sigma_z")[sel]], axis=1)
    vnorm = np.linalg.norm(v, axis=1)
    if np.any(vnorm < 1e-12):
        raise ExperimentError("Bloch vector length vanishes inside the window")
    cosang = (v[:, 0] * bx + v[:, 2] * bz) / (vnorm * bnorm)
    return np.arccos(np.clip(cosang, -1.0, 1.0))


def adiabatic_basis_following(cfg: ExperimentConfig, durations,
                              n_quasistatic: int = 48,
                              step_factor: float = 1.0,
                              ramp_stage: float | None = None) -> SimResult:
    """Final P(e) after ramp-in, rotation for each duration, and ramp-out.

    The ramp-out maps the instantaneous upper band onto |g>, so perfect
    following reads P(e) = 0 and band leakage or decoherence lifts it
    toward 1/2. Times in the returned series are rotation durations.

    The ramp-in and rotation are shared across durations, so the ride is
    propagated once with state snapshots and only the ramp-out is evolved
    per duration.
    """
    durations = np.asarray(durations, dtype=float)
    if durations.ndim != 1 or len(durations) < 1:
        raise ExperimentError("durations must be a non-empty 1-d array")
    if np.any(durations <= 0) or np.any(np.diff(durations) <= 0):
        raise ExperimentError("durations must be positive and strictly increasing")
    fp = cfg.field
    intro = ramp_in(fp, stage=ramp_stage)
    ride = chain(intro, elliptic_field(fp, float(durations[-1])))
    snap_times = np.concatenate([[0.0], intro.duration + durations])
    outs = []
    for d in durations:
        fx, fz = field_vector(fp, d)
        outs.append(ramp_out(fp, float(fx), float(fz), stage=ramp_stage))
    rng = np.random.default_rng(cfg.seed)

    def run(offset_mhz):
        src = detuned(schedule_source(ride), offset_mhz)
        base = evolve_qubit(src, snap_times, cfg, observables={},
                            store_states=True, step_factor=step_factor)
        pe = np.empty(len(durations))
        for i, out in enumerate(outs):
            osrc = detuned(schedule_source(out), offset_mhz)
            res = evolve_qubit(osrc, np.array([0.0, out.duration]), cfg,
                               psi0=base.states[i + 1],
                               observables={"pe": PROJ_E},
                               step_factor=step_factor)
            pe[i] = res.column("pe")[-1]
        return SimResult(times=durations.copy(), observables={"pe": pe})

    res = _averaged(run, cfg, n_quasistatic)
    res.observables["pe"] = measured_pe(res.column("pe"), cfg, rng)
    res.meta.update(b0_mhz=fp.b0, m=fp.m, omega_mod_mhz=fp.omega_mod,
                    basis="adiabatic")
    return res


def harmonic_content_map(cfg: ExperimentConfig, b0_grid, omega_grid,
                         durations=None, n_quasistatic: int = 1,
                         max_step_factor: float = 8.0) -> GridMap:
    """Harmonic-content score F on a (omega_mod, b0) grid.

    Every pixel rides a circular field (m = 0, so the gap stays open for
    any amplitude) and scores the eigenbasis P(e)(duration) series with
    fractional_harmonic_content: breakdown pixels nutate and score near
    1, following pixels relax smoothly and sit near the sub-cutoff floor.
    Rows are omega_mod values, columns b0 values.
    """
    b0_grid = np.asarray(b0_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    if durations is None:
        durations = np.arange(1, 172) * 0.07
    durations = np.asarray(durations, dtype=float)
    values = np.empty((len(omega_grid), len(b0_grid)))
    for i, om in enumerate(omega_grid):
        for j, b0 in enumerate(b0_grid):
            # substep budget tracks |H| (prop. b0), not the drive
            # bandwidth; cap the factor so slow-field pixels stay resolved
            sf = float(np.clip(b0 / om, 1.0, max_step_factor))
            pcfg = with_field(cfg, b0=float(b0), m=0.0, omega_mod=float(om))
            res = adiabatic_basis_following(pcfg, durations,
                                            n_quasistatic=n_quasistatic,
                                            step_factor=sf)
            spec = power_spectrum(res.times, res.column("pe"))
            values[i, j] = fractional_harmonic_content(spec)
    return GridMap(rows=omega_grid, cols=b0_grid, values=values,
                   row_label="omega_mod_mhz", col_label="b0_mhz",
                   value_label="harmonic_content",
                   meta={"durations_us": durations, "m": 0.0})


def breakdown_boundary(fmap: GridMap, min_contrast: float = 0.5):
    """Ratio b0/omega_mod where F crosses between its plateaus, per row.

    The high plateau of a row is its maximum, the low plateau the mean of
    the two largest-b0 pixels, and the boundary the b0 where F crosses
    their midpoint, interpolated in log(b0) scanning from the large-b0
    side (resonant dips below the crossing are ignored). Rows whose
    plateau contrast is under min_contrast times the map-wide contrast
    get nan: their transition is off-grid or unresolved.

    Returns (mean_ratio, ratios) with one ratio per row.
    """
    vals = fmap.values
    b0 = np.asarray(fmap.cols, dtype=float)
    if vals.shape[1] < 3:
        raise ExperimentError("need at least 3 b0 columns to locate plateaus")
    global_contrast = float(vals.max() - vals.min())
    ratios = np.full(len(fmap.rows), np.nan)
    for i, om in enumerate(np.asarray(fmap.rows, dtype=float)):
        row = vals[i]
        high = float(row.max())
        low = float(row[-2:].mean())
        if high - low < min_contrast * global_contrast:
            continue
        mid = 0.5 * (high + low)
        above = row >= mid
        for k in range(len(row) - 2, -1, -1):
            if above[k] and not above[k + 1]:
                t = (row[k] - mid) / (row[k] - row[k + 1])
                ratios[i] = b0[k] * (b0[k + 1] / b0[k]) ** t / om
                break
    good = ratios[np.isfinite(ratios)]
    if len(good) == 0:
        raise ExperimentError("no row resolved a following/breakdown boundary")
    return float(good.mean()), ratios
