"""Spectral metrics, decay-envelope fits, and synthetic-torus topology.

The adiabaticity diagnostic works in frequency space: a qubit that follows
the rotating field produces a spectrum concentrated at low frequency, while
nutation pushes power above the cutoff. The torus tools treat the drive
phase and the cavity phase as the two coordinates of a synthetic Brillouin
zone and compute the band Chern number that sets the pump rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .units import TWO_PI

# cutoff of the fractional-harmonic-content integral, rad/us
HARMONIC_CUTOFF = TWO_PI * 0.167


class AnalysisError(ValueError):
    pass


class FitError(AnalysisError):
    pass


def _uniform_dt(times: np.ndarray) -> float:
    steps = np.diff(times)
    if len(steps) == 0 or steps.min() <= 0:
        raise AnalysisError("need at least two strictly increasing times")
    if np.ptp(steps) > 1e-9 * steps.max():
        raise AnalysisError("time grid is not uniform")
    return float(steps.mean())


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum; bin powers sum to the detrended mean square."""

    freqs: np.ndarray
    power: np.ndarray
    omega_s: float  # sampling rate, MHz
    dc_mode: str    # how the baseline was removed: "asymptote" or "mean"
    baseline: float

    @property
    def normalization(self) -> float:
        return float(self.power.sum())


def power_spectrum(times, values, hann: bool = False) -> Spectrum:
    """One-sided periodogram of a uniformly sampled real series.

    The series' long-time asymptote (exponential-fit offset when such a fit
    converges, otherwise the mean) is subtracted first, so decay toward a
    mixed-state plateau does not show up as DC power.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise AnalysisError("times and values must be matching 1-d arrays")
    dt = _uniform_dt(times)

    lo, hi = float(values.min()), float(values.max())
    slack = 0.25 * (hi - lo)
    try:
        fit = fit_exponential(times, values)
        # a meaningful asymptote lies near the observed range (slightly past
        # it for an unconverged decay); reject the runaway offsets the fit
        # produces on oscillation-dominated series
        if (fit.identifiable and np.isfinite(fit.offset)
                and lo - slack <= fit.offset <= hi + slack):
            baseline, mode = fit.offset, "asymptote"
        else:
            baseline, mode = float(values.mean()), "mean"
    except FitError:
        baseline, mode = float(values.mean()), "mean"
    y = values - baseline

    n = len(y)
    if hann:
        w = np.hanning(n)
        y = y * w / np.sqrt((w ** 2).mean())
    spec = np.fft.rfft(y)
    power = np.abs(spec) ** 2 / n ** 2
    # fold negative frequencies; DC (and Nyquist for even n) are unpaired
    power[1:] *= 2.0
    if n % 2 == 0:
        power[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, dt)
    return Spectrum(freqs=freqs, power=power, omega_s=1.0 / dt,
                    dc_mode=mode, baseline=baseline)


def fractional_harmonic_content(s: Spectrum, omega_c: float = HARMONIC_CUTOFF) -> float:
    """Fraction of spectral power above the cutoff (angular, rad/us).

    Trapezoidal integral over the frequency grid; the bin straddling the
    cutoff enters with linear weight.
    """
    f_c = omega_c / TWO_PI
    if not 0.0 <= f_c < s.freqs[-1]:
        raise AnalysisError(f"cutoff {f_c} MHz outside spectral range")
    total = np.trapz(s.power, s.freqs)
    if total <= 0.0:
        raise AnalysisError("zero total power, F undefined")
    j = int(np.searchsorted(s.freqs, f_c, side="right"))
    p_c = float(np.interp(f_c, s.freqs, s.power))
    tail_f = np.concatenate([[f_c], s.freqs[j:]])
    tail_p = np.concatenate([[p_c], s.power[j:]])
    return float(np.trapz(tail_p, tail_f) / total)


@dataclass(frozen=True)
class ExponentialFit:
    amplitude: float
    tau: float
    offset: float
    residual_norm: float
    identifiable: bool


def fit_exponential(times, values) -> ExponentialFit:
    """Least-squares fit of a*exp(-t/tau) + c.

    A constant series has no decay scale; it is returned with
    identifiable=False and tau = nan rather than a fabricated time.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 10:
        raise FitError("need at least 10 points for an exponential fit")
    scale = max(1.0, float(np.abs(y).max()))
    if np.ptp(y) < 1e-12 * scale:
        return ExponentialFit(0.0, float("nan"), float(y.mean()), 0.0, False)

    span = float(t[-1] - t[0])
    c0 = float(y[-max(3, len(y) // 10):].mean())
    a0 = float(y[0] - c0)
    dev = np.abs(y - c0)
    below = np.nonzero(dev < abs(a0) / np.e)[0]
    tau0 = float(t[below[0]] - t[0]) if len(below) and below[0] > 0 else span / 3.0
    tau0 = min(max(tau0, 1e-3 * span), 1e3 * span)

    def model(tt, a, tau, c):
        return a * np.exp(-tt / tau) + c

    try:
        popt, _ = optimize.curve_fit(
            model, t, y, p0=(a0, tau0, c0),
            bounds=((-np.inf, 1e-6 * span, -np.inf), (np.inf, 1e6 * span, np.inf)),
            maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"exponential fit did not converge: {exc}") from exc
    res = float(np.sqrt(np.mean((model(t, *popt) - y) ** 2)))
    return ExponentialFit(float(popt[0]), float(popt[1]), float(popt[2]), res, True)


@dataclass(frozen=True)
class GaussianFit:
    amplitude: float
    tau_g: float
    frequency: float
    phase: float
    offset: float
    residual_norm: float
    good_fit: bool


def _count_extrema(y: np.ndarray) -> int:
    d = np.sign(np.diff(y))
    d = d[d != 0]
    return int(np.sum(d[1:] != d[:-1]))


def fit_gaussian_envelope(times, values) -> GaussianFit:
    """Fit a*exp(-(t/tau_g)^2)*cos(2 pi f t + phi) + c to an oscillating decay.

    good_fit goes False when the residual exceeds 15% of the fitted
    amplitude, which catches non-Gaussian (for example purely exponential)
    inputs that happen to pass the extrema gate.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 10:
        raise FitError("need at least 10 points for an envelope fit")
    if _count_extrema(y) < 3:
        raise FitError("no visible oscillation (fewer than 3 extrema)")

    dt = _uniform_dt(t)
    yc = y - y.mean()
    spec = np.abs(np.fft.rfft(yc))
    freqs = np.fft.rfftfreq(len(yc), dt)
    f0 = float(freqs[1 + int(np.argmax(spec[1:]))])
    a0 = float(np.ptp(y) / 2.0)
    c0 = float(y.mean())
    span = float(t[-1] - t[0])

    def model(tt, a, tau_g, f, phi, c):
        return a * np.exp(-((tt / tau_g) ** 2)) * np.cos(TWO_PI * f * tt + phi) + c

    try:
        popt, _ = optimize.curve_fit(
            model, t, y, p0=(a0, span / 2.0, f0, 0.0, c0),
            bounds=((0.0, 1e-3 * span, 0.0, -np.pi, -np.inf),
                    (np.inf, 1e3 * span, 0.5 / dt, np.pi, np.inf)),
            maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"envelope fit did not converge: {exc}") from exc
    res = float(np.sqrt(np.mean((model(t, *popt) - y) ** 2)))
    good = bool(res <= 0.15 * max(abs(popt[0]), 1e-12))
    return GaussianFit(float(popt[0]), float(popt[1]), float(popt[2]),
                       float(popt[3]), float(popt[4]), res, good)


@dataclass(frozen=True)
class TorusGrid:
    """d-vector field sampled on the (theta1, theta2) synthetic torus."""

    n1: int
    n2: int
    d_field: np.ndarray  # shape (n1, n2, 3)

    def __post_init__(self):
        d = np.asarray(self.d_field, dtype=float)
        if d.shape != (self.n1, self.n2, 3) or not np.all(np.isfinite(d)):
            raise AnalysisError("d_field must be a finite (n1, n2, 3) array")
        object.__setattr__(self, "d_field", d)

    @classmethod
    def from_function(cls, fn, n1: int, n2: int) -> "TorusGrid":
        """Sample fn(theta1, theta2) -> 3-vector on an endpoint-free grid."""
        th1 = TWO_PI * np.arange(n1) / n1
        th2 = TWO_PI * np.arange(n2) / n2
        d = np.empty((n1, n2, 3))
        for i, a in enumerate(th1):
            for j, b in enumerate(th2):
                d[i, j] = fn(a, b)
        return cls(n1, n2, d)

    @property
    def min_gap(self) -> float:
        return float(np.linalg.norm(self.d_field, axis=-1).min())


def pump_torus(fp, g: float, n: float, n1: int = 24, n2: int = 24,
               doubled: bool = False) -> TorusGrid:
    """Two-phase reduction of the pump model at photon number n.

    d = (B0(m + cos t1) + A cos t2, A sin t2, B0 sin t1) with the cavity
    classicalized to amplitude A = g*sqrt(n) (doubled=True uses 2 g sqrt(n)).
    """
    a_c = (2.0 if doubled else 1.0) * g * np.sqrt(n)
    th1 = TWO_PI * np.arange(n1) / n1
    th2 = TWO_PI * np.arange(n2) / n2
    t1, t2 = np.meshgrid(th1, th2, indexing="ij")
    d = np.stack([fp.b0 * (fp.m + np.cos(t1)) + a_c * np.cos(t2),
                  a_c * np.sin(t2),
                  fp.b0 * np.sin(t1)], axis=-1)
    return TorusGrid(n1, n2, d)


def chern_number(grid: TorusGrid) -> int:
    """Chern number of the lower band of (1/2) d . sigma on the torus.

    Lattice field-strength method: Berry phases of plaquette link products,
    summed over the torus and divided by 2 pi. The sum is an exact integer;
    a residue above 1e-6 or a closing gap raises instead of rounding junk.
    """
    d = grid.d_field
    r = np.linalg.norm(d, axis=-1)
    if r.min() <= 1e-9 * r.max():
        raise AnalysisError(f"gap closes on the grid (min |d| = {r.min():.3g})")

    h = np.empty((grid.n1, grid.n2, 2, 2), dtype=complex)
    h[..., 0, 0] = d[..., 2]
    h[..., 1, 1] = -d[..., 2]
    h[..., 0, 1] = d[..., 0] - 1j * d[..., 1]
    h[..., 1, 0] = d[..., 0] + 1j * d[..., 1]
    _, vecs = np.linalg.eigh(0.5 * h)
    u = vecs[..., :, 0]  # lower band

    link1 = np.einsum("ijk,ijk->ij", u.conj(), np.roll(u, -1, axis=0))
    link2 = np.einsum("ijk,ijk->ij", u.conj(), np.roll(u, -1, axis=1))
    if min(np.abs(link1).min(), np.abs(link2).min()) < 1e-12:
        raise AnalysisError("orthogonal neighboring states, grid too coarse")
    plaq = link1 * np.roll(link2, -1, axis=0) \
        * np.conj(np.roll(link1, -1, axis=1)) * np.conj(link2)
    total = float(np.angle(plaq).sum() / TWO_PI)
    c = round(total)
    if abs(total - c) > 1e-6:
        raise AnalysisError(f"non-integer Chern sum {total}, grid inadmissible")
    return int(c)


@dataclass(frozen=True)
class WindowVerdict:
    """Position of g*sqrt(n) relative to the topological window."""

    inside: bool
    lower_margin: float  # amplitude minus lower edge, MHz
    upper_margin: float  # upper edge minus amplitude, MHz
    amplitude: float


def topological_window(fp, n: float, g: float = 13.0,
                       doubled: bool = False) -> WindowVerdict:
    """Evaluate B0|1-m| < A < B0(1+m) with A the classicalized coupling.

    doubled=True uses A = 2 g sqrt(n) instead of g sqrt(n); both circulate
    in the literature and the choice must match the torus construction.
    """
    if n < 0:
        raise AnalysisError("photon number must be nonnegative")
    a = (2.0 if doubled else 1.0) * g * np.sqrt(n)
    lower = fp.b0 * abs(1.0 - fp.m)
    upper = fp.b0 * (1.0 + fp.m)
    return WindowVerdict(inside=bool(lower < a < upper),
                         lower_margin=float(a - lower),
                         upper_margin=float(upper - a),
                         amplitude=float(a))


@dataclass(frozen=True)
class PumpRate:
    slope: float   # photons per us
    stderr: float
    window: tuple


def pump_rate_estimate(result, t_window: tuple | None = None,
                       period: float | None = None) -> PumpRate:
    """Least-squares slope of <n>(t) over the window, photons per us.

    Accepts a SimResult carrying an "nbar" channel or a (times, values)
    pair. When the drive period is given, the window must span at least
    five periods for the slope to mean anything.
    """
    if hasattr(result, "column"):
        times, values = result.times, result.column("nbar")
    else:
        times, values = result
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if t_window is None:
        t_window = (float(times[0]), float(times[-1]))
    t1, t2 = t_window
    if period is not None and (t2 - t1) < 5.0 * period - 1e-12:
        raise AnalysisError(f"window {t2 - t1:.3g} us shorter than 5 periods")
    sel = (times >= t1) & (times <= t2)
    if int(sel.sum()) < 3:
        raise AnalysisError("window too short, fewer than 3 samples")
    t = times[sel]
    y = values[sel]
    tc = t - t.mean()
    denom = float((tc ** 2).sum())
    slope = float((tc * y).sum() / denom)
    res = y - y.mean() - slope * tc
    dof = len(t) - 2
    stderr = float(np.sqrt((res ** 2).sum() / dof / denom)) if dof > 0 else float("nan")
    return PumpRate(slope=slope, stderr=stderr, window=(float(t1), float(t2)))
