"""Control-channel synthesis for the rotating-frame field experiments.

Two channels drive the qubit: the x channel carries the drive amplitude
(Rabi rate, MHz) and the z channel the detuning modulation (MHz). Channels
are sampled waveforms with AWG-like granularity; analytic shapes are
evaluated at bin centers. A Schedule bundles both channels with named
time markers and an optional z-line delay, mirroring the uncontrolled
lag between the microwave and flux lines that the delay-calibration
experiment measures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .hamiltonians import FieldParams, field_vector

DEFAULT_DT = 1e-3  # 1 ns in us


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Waveform:
    """One sampled channel: value samples[k] holds on the k-th dt bin."""

    dt: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", arr)
        if not self.dt > 0:
            raise ScheduleError(f"dt must be positive, got {self.dt}")
        if arr.ndim != 1:
            raise ScheduleError("samples must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ScheduleError("samples must be finite")

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    @property
    def end(self) -> float:
        return self.t0 + self.duration

    @property
    def times(self) -> np.ndarray:
        """Bin-center times of the samples."""
        return self.t0 + (np.arange(len(self.samples)) + 0.5) * self.dt

    def value(self, t) -> np.ndarray:
        """Sample-and-hold lookup; edge values held outside the span."""
        idx = np.floor((np.asarray(t, dtype=float) - self.t0) / self.dt).astype(int)
        idx = np.clip(idx, 0, len(self.samples) - 1)
        return self.samples[idx]

    def shifted(self, delay: float) -> "Waveform":
        return replace(self, t0=self.t0 + delay)

    def to_dict(self) -> dict:
        return {"dt": self.dt, "t0": self.t0, "samples": self.samples.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Waveform":
        return cls(dt=float(d["dt"]), samples=np.asarray(d["samples"], dtype=float),
                   t0=float(d["t0"]))


def _sampled(fn, duration: float, dt: float, t0: float = 0.0) -> Waveform:
    n = int(round(duration / dt))
    t = (np.arange(n) + 0.5) * dt
    return Waveform(dt=dt, samples=np.asarray(fn(t), dtype=float), t0=t0)


@dataclass(frozen=True)
class Schedule:
    """x/z channel pair with named markers and a z-line delay."""

    x_channel: Waveform
    z_channel: Waveform
    z_delay: float = 0.0
    markers: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.z_delay < 0:
            raise ScheduleError("z_delay must be nonnegative")

    @property
    def duration(self) -> float:
        return max(self.x_channel.end, self.z_channel.end + self.z_delay)

    def field_at(self, t):
        """(x, z) channel values in MHz; the z channel arrives z_delay late."""
        x = self.x_channel.value(t)
        z = self.z_channel.value(np.asarray(t, dtype=float) - self.z_delay)
        return x, z

    def with_markers(self, **marks) -> "Schedule":
        merged = dict(self.markers)
        merged.update(marks)
        return replace(self, markers=merged)

    def to_dict(self) -> dict:
        return {
            "x_channel": self.x_channel.to_dict(),
            "z_channel": self.z_channel.to_dict(),
            "z_delay": self.z_delay,
            "markers": dict(self.markers),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        return cls(
            x_channel=Waveform.from_dict(d["x_channel"]),
            z_channel=Waveform.from_dict(d["z_channel"]),
            z_delay=float(d.get("z_delay", 0.0)),
            markers=dict(d.get("markers", {})),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Schedule":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def circular_field(fp: FieldParams, duration: float, dt: float = DEFAULT_DT) -> Schedule:
    """Rotating field of constant magnitude: x = B0 cos, z = B0 sin."""
    if duration <= 0:
        raise ScheduleError("duration must be positive")
    w = 2.0 * np.pi * fp.omega_mod
    x = _sampled(lambda t: fp.b0 * np.cos(w * t), duration, dt)
    z = _sampled(lambda t: fp.b0 * np.sin(w * t), duration, dt)
    return Schedule(x_channel=x, z_channel=z,
                    markers={"rotation_start": 0.0, "rotation_end": duration,
                             "readout": duration})


def elliptic_field(fp: FieldParams, duration: float, dt: float = DEFAULT_DT) -> Schedule:
    """Offset rotating field: x = B0 (m + cos), z = B0 sin.

    m = 0 reduces to circular_field; m = 1 closes the field magnitude at
    half period, which is where the pump exchanges excitations.
    """
    if duration <= 0:
        raise ScheduleError("duration must be positive")
    sched = circular_field(fp, duration, dt)
    x = replace(sched.x_channel, samples=sched.x_channel.samples + fp.b0 * fp.m)
    return replace(sched, x_channel=x)


def trapezoid(amplitude: float, t_start: float, t_stop: float, ramp: float,
              dt: float = DEFAULT_DT, total: float | None = None) -> Waveform:
    """Flat-top pulse with linear on/off ramps of width `ramp`."""
    if t_stop - t_start < 2.0 * ramp:
        raise ScheduleError("pulse window shorter than the two ramps")
    if total is None:
        total = t_stop

    def shape(t):
        up = np.clip((t - t_start) / ramp, 0.0, 1.0) if ramp > 0 else (t >= t_start) * 1.0
        down = np.clip((t_stop - t) / ramp, 0.0, 1.0) if ramp > 0 else (t < t_stop) * 1.0
        return amplitude * np.minimum(up, down) * (t >= t_start) * (t <= t_stop)

    return _sampled(shape, total, dt)


def lz_delay_schedule(omega: float, delta: float, tau: float, tau_del: float,
                      fbl_width: float = 1.0, dt: float = DEFAULT_DT) -> Schedule:
    """Drive step on [0, tau] against a detuning flip on [tau_del, tau_del+width].

    The z channel sits at -delta and flips to +delta inside the flux pulse
    window; each flip edge that falls inside the drive support sweeps the
    qubit through resonance once.
    """
    if tau < 0 or tau_del < 0:
        raise ScheduleError("tau and tau_del must be nonnegative")
    total = max(tau, tau_del + fbl_width) + 0.2
    x = _sampled(lambda t: omega * (t <= tau), total, dt)
    z = _sampled(
        lambda t: delta * (-1.0 + 2.0 * ((t >= tau_del) & (t < tau_del + fbl_width))),
        total, dt)
    return Schedule(x_channel=x, z_channel=z,
                    markers={"drive_end": tau, "readout": total})


def default_stage(b0: float) -> float:
    """Ramp stage duration keeping the diabatic error under 1e-3."""
    return max(0.2, 2.8 / b0)


def ramp_in(fp: FieldParams, stage: float | None = None,
            dt: float = DEFAULT_DT) -> Schedule:
    """Prepare the rotating-frame field from idle without leaving the band.

    Starting far detuned (z offset -min{200, 4 B0}), the x channel ramps to
    its t=0 field value, then the z channel ramps to its t=0 value. The
    ground state at the far-detuned start maps onto the instantaneous lower
    eigenstate of the final field.
    """
    if fp.b0 <= 0:
        raise ScheduleError("b0 must be positive")
    if stage is None:
        stage = default_stage(fp.b0)
    x0, z0 = field_vector(fp, 0.0)
    z_off = -min(200.0, 4.0 * fp.b0)

    def x_shape(t):
        return x0 * np.clip(t / stage, 0.0, 1.0)

    def z_shape(t):
        frac = np.clip((t - stage) / stage, 0.0, 1.0)
        return z_off + (z0 - z_off) * frac

    total = 2.0 * stage
    return Schedule(x_channel=_sampled(x_shape, total, dt),
                    z_channel=_sampled(z_shape, total, dt),
                    markers={"rotation_start": total})


def ramp_out(fp: FieldParams, freeze_x: float, freeze_z: float,
             buffer: float | None = None, stage: float | None = None,
             dt: float = DEFAULT_DT) -> Schedule:
    """Map the instantaneous field eigenstates onto the readout basis.

    Channels freeze at their instantaneous values, hold for `buffer`, then
    the x channel ramps to +/-max{25, B0} (keeping the sign of the frozen
    value so the field never sweeps through zero), the z channel ramps to
    -min{200, 4 B0}, and both ramp off, x first.
    """
    if buffer is None:
        buffer = 0.15 if fp.b0 < 25.0 else 0.0
    if stage is None:
        stage = default_stage(fp.b0)
    x_big = max(25.0, fp.b0) * (1.0 if freeze_x >= 0 else -1.0)
    z_off = -min(200.0, 4.0 * fp.b0)
    # stage boundaries: hold, x up, z down, x off, z off
    t1 = buffer
    t2 = t1 + stage
    t3 = t2 + stage
    t4 = t3 + stage
    t5 = t4 + stage

    def x_shape(t):
        out = np.empty_like(t)
        seg = t < t2
        out[seg] = freeze_x + (x_big - freeze_x) * np.clip(
            (t[seg] - t1) / stage, 0.0, 1.0)
        seg = (t >= t2) & (t < t3)
        out[seg] = x_big
        seg = t >= t3
        out[seg] = x_big * (1.0 - np.clip((t[seg] - t3) / stage, 0.0, 1.0))
        return out

    def z_shape(t):
        out = np.empty_like(t)
        seg = t < t2
        out[seg] = freeze_z
        seg = (t >= t2) & (t < t4)
        out[seg] = freeze_z + (z_off - freeze_z) * np.clip(
            (t[seg] - t2) / stage, 0.0, 1.0)
        seg = t >= t4
        out[seg] = z_off * (1.0 - np.clip((t[seg] - t4) / stage, 0.0, 1.0))
        return out

    return Schedule(x_channel=_sampled(x_shape, t5, dt),
                    z_channel=_sampled(z_shape, t5, dt),
                    markers={"readout": t5})


def staged_shutoff(axis: str, freeze_x: float, freeze_z: float,
                   hold: float = 0.05, stage: float = 0.05,
                   dt: float = DEFAULT_DT) -> Schedule:
    """Turn both channels off so any residual precession is about the
    measurement axis: the measured channel stays on while the other ramps
    to zero, then shuts off itself."""
    if axis not in ("x", "z"):
        raise ScheduleError(f"axis must be 'x' or 'z', got {axis!r}")
    t1 = stage          # other channel ramps down
    t2 = t1 + hold      # measured channel holds
    t3 = t2 + stage     # measured channel ramps down

    def down_first(t, v0):
        return v0 * (1.0 - np.clip(t / stage, 0.0, 1.0))

    def down_second(t, v0):
        return v0 * (1.0 - np.clip((t - t2) / stage, 0.0, 1.0))

    if axis == "z":
        x = _sampled(lambda t: down_first(t, freeze_x), t3, dt)
        z = _sampled(lambda t: down_second(t, freeze_z), t3, dt)
        markers = {"readout": t3}
    else:
        z = _sampled(lambda t: down_first(t, freeze_z), t3, dt)
        x = _sampled(lambda t: down_second(t, freeze_x), t3, dt)
        markers = {"half_pi": t3, "readout": t3}
    return Schedule(x_channel=x, z_channel=z, markers=markers)


def apply_delay(s: Schedule, delay: float) -> Schedule:
    """Inject a z-line transmission delay; markers tied to the z channel
    (readout waits for the late-arriving content) shift with it."""
    if delay < 0:
        raise ScheduleError("delay must be nonnegative")
    if delay == 0.0:
        return s
    markers = {k: v + delay for k, v in s.markers.items()}
    return replace(s, z_delay=s.z_delay + delay, markers=markers)


def chain(*scheds: Schedule) -> Schedule:
    """Concatenate schedules in time; all channels must share dt."""
    if not scheds:
        raise ScheduleError("need at least one schedule")
    dt = scheds[0].x_channel.dt
    for s in scheds:
        if s.x_channel.dt != dt or s.z_channel.dt != dt:
            raise ScheduleError("all schedules must share one sample spacing")
        if s.z_delay != 0.0:
            raise ScheduleError("resolve z_delay before chaining")
    xs, zs, markers = [], [], {}
    offset = 0.0
    for s in scheds:
        n = max(len(s.x_channel.samples), len(s.z_channel.samples))
        for wf, acc in ((s.x_channel, xs), (s.z_channel, zs)):
            pad = n - len(wf.samples)
            arr = wf.samples if pad == 0 else np.concatenate(
                [wf.samples, np.full(pad, wf.samples[-1] if len(wf.samples) else 0.0)])
            acc.append(arr)
        for k, v in s.markers.items():
            markers[k] = v + offset
        offset += n * dt
    return Schedule(x_channel=Waveform(dt=dt, samples=np.concatenate(xs)),
                    z_channel=Waveform(dt=dt, samples=np.concatenate(zs)),
                    markers=markers)


def schedule_source(s: Schedule):
    """Hamiltonian source over the schedule's channels: H(t) in rad/us,
    x drive on sigma_x/2 and detuning on sigma_z/2."""
    def source(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x, z = s.field_at(t)
        h = np.zeros((len(t), 2, 2), dtype=complex)
        w = 2.0 * np.pi
        h[:, 0, 0] = 0.5 * w * z
        h[:, 1, 1] = -0.5 * w * z
        h[:, 0, 1] = 0.5 * w * x
        h[:, 1, 0] = 0.5 * w * x
        return h
    return source
