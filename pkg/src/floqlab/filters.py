"""Flux-line low-pass filter model and ringing precompensation.

The flux channel reaches the qubit through a sharp low-pass whose damped
oscillatory impulse response rings every fast edge. The fix used here:
flip the sign of the kernel's oscillatory tail, renormalize, and convolve
waveforms with that precompensation kernel before they enter the line, so
the line's own ringing cancels. Group delay is treated as constant and
removed by centroid alignment.
"""

from __future__ import annotations

import numpy as np
from scipy import signal

from .schedules import Waveform


class FilterError(ValueError):
    pass


class Kernel:
    """FIR kernel: taps at spacing dt, gain = sum of taps."""

    def __init__(self, dt: float, taps):
        taps = np.asarray(taps, dtype=float)
        if dt <= 0:
            raise FilterError("dt must be positive")
        if taps.ndim != 1 or len(taps) == 0 or not np.all(np.isfinite(taps)):
            raise FilterError("taps must be a finite 1-d array")
        self.dt = dt
        self.taps = taps

    @property
    def gain(self) -> float:
        return float(self.taps.sum())

    @property
    def group_delay(self) -> float:
        """Signed first moment of the taps (DC-limit group delay), in us."""
        g = self.taps.sum()
        if abs(g) < 1e-12:
            raise FilterError("zero-gain kernel has no defined centroid")
        return float((np.arange(len(self.taps)) * self.taps).sum() / g * self.dt)

    def normalized(self) -> "Kernel":
        g = self.gain
        if abs(g) < 1e-12:
            raise FilterError("kernel has zero gain, cannot normalize")
        return Kernel(self.dt, self.taps / g)

    def response_at(self, freq_mhz: float) -> complex:
        """Frequency response at freq (MHz), dt in us."""
        _, h = signal.freqz(self.taps, worN=[2.0 * np.pi * freq_mhz * self.dt])
        return complex(h[0])

    def to_text(self) -> str:
        lines = [f"dt {self.dt!r}"] + [repr(float(v)) for v in self.taps]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Kernel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("dt "):
            raise FilterError("kernel record must start with a 'dt <value>' line")
        return cls(float(lines[0][3:]), [float(ln) for ln in lines[1:]])


def synth_lowpass_kernel(cutoff: float = 6.0, order: int = 4,
                         dt: float = 1e-3) -> Kernel:
    """Impulse response of a sharp elliptic-style low-pass at `cutoff` MHz.

    Inverse-Chebyshev prototype (flat monotone passband, equiripple
    stopband 50 dB down past 1.5x cutoff). Truncated once the tail stays
    below 1e-4 of the peak, normalized to unity gain. The response has a
    main lobe plus a damped oscillatory tail, which is what rings square
    edges.
    """
    if cutoff <= 0:
        raise FilterError("cutoff must be positive")
    if dt > 1.0 / (20.0 * cutoff):
        raise FilterError(f"dt={dt} does not resolve cutoff {cutoff} MHz")
    # frequencies normalized to Nyquist = 1/(2 dt); corner above cutoff so
    # the passband stays flat through cutoff/2
    wn = 2.0 * (1.5 * cutoff) * dt
    b, a = signal.cheby2(order, 50.0, wn)
    n = int(round(60.0 / (cutoff * dt)))  # long enough for the tail to die out
    _, (h,) = signal.dimpulse((b, a, dt), n=n)
    h = h.ravel()
    peak = np.abs(h).max()
    keep = np.nonzero(np.abs(h) >= 1e-4 * peak)[0]
    return Kernel(dt, h[: keep[-1] + 1]).normalized()


def precompensation_kernel(k: Kernel) -> Kernel:
    """Negate the oscillatory tail (everything past the first zero crossing
    after the peak tap) and renormalize."""
    taps = k.taps
    peak = int(np.argmax(np.abs(taps)))
    sgn = np.sign(taps[peak])
    after = np.nonzero(sgn * taps[peak:] <= 0.0)[0]
    if len(after) == 0:
        raise FilterError("no zero crossing after the peak, nothing to flip")
    cut = peak + after[0]
    out = taps.copy()
    out[cut:] = -out[cut:]
    return Kernel(k.dt, out).normalized()


def convolve(w: Waveform, k: Kernel) -> Waveform:
    """Linear convolution; the kernel centroid delay is taken out of t0 so
    filtered features stay aligned with their nominal times."""
    if abs(w.dt - k.dt) > 1e-12:
        raise FilterError(f"dt mismatch: waveform {w.dt}, kernel {k.dt}")
    y = np.convolve(w.samples, k.taps)
    return Waveform(dt=w.dt, samples=y, t0=w.t0 - k.group_delay)


def ripple_metric(w: Waveform, flat_window: tuple) -> float:
    """max |w - mean| over the window, relative to the mean level there."""
    t1, t2 = flat_window
    times = w.times
    sel = (times >= t1) & (times <= t2)
    if not np.any(sel):
        raise FilterError("flat window contains no samples")
    seg = w.samples[sel]
    level = seg.mean()
    if abs(level) < 1e-12:
        raise FilterError("window level is zero, ripple undefined")
    return float(np.abs(seg - level).max() / abs(level))


def amplitude_boost(k: Kernel, freq_mhz: float) -> float:
    """Multiplicative gain correcting the kernel's droop at freq (MHz)."""
    mag = abs(k.response_at(freq_mhz))
    if mag < 1e-6:
        raise FilterError("kernel suppresses this frequency entirely")
    return 1.0 / mag
