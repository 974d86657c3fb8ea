import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqlab.analysis import (HARMONIC_CUTOFF, AnalysisError, FitError,
                              TorusGrid, chern_number,
                              fit_exponential, fit_gaussian_envelope,
                              fractional_harmonic_content, power_spectrum,
                              pump_rate_estimate, pump_torus,
                              topological_window)
from floqlab.hamiltonians import FieldParams
from floqlab.units import TWO_PI


def qwz_grid(mu, n=24):
    def fn(a, b):
        return np.array([np.sin(a), np.sin(b), mu + np.cos(a) + np.cos(b)])
    return TorusGrid.from_function(fn, n, n)


class TestPowerSpectrum:
    def test_parseval(self):
        t = np.linspace(0.0, 12.0, 1201)
        y = 0.4 * np.cos(TWO_PI * 1.3 * t) + 0.2
        s = power_spectrum(t, y)
        detrended = ((y - s.baseline) ** 2).mean()
        assert s.normalization == pytest.approx(detrended, rel=1e-12)

    def test_single_tone_concentrates(self):
        t = np.linspace(0.0, 16.0, 1601)
        s = power_spectrum(t, np.cos(TWO_PI * 2.0 * t))
        peak = s.freqs[np.argmax(s.power)]
        assert peak == pytest.approx(2.0, abs=s.freqs[1])
        assert s.power.max() / s.normalization > 0.95

    def test_decay_baseline_is_asymptote(self):
        t = np.linspace(0.0, 30.0, 601)
        s = power_spectrum(t, 0.7 * np.exp(-t / 4.0) + 0.25)
        assert s.dc_mode == "asymptote"
        assert s.baseline == pytest.approx(0.25, abs=1e-3)

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(AnalysisError):
            power_spectrum([0.0, 1.0, 3.0], [1.0, 2.0, 3.0])


class TestHarmonicContent:
    def test_fast_tone_scores_high(self):
        t = np.linspace(0.0, 12.0, 1201)
        F = fractional_harmonic_content(power_spectrum(t, np.cos(TWO_PI * t)))
        assert F > 0.99

    def test_slow_decay_scores_low(self):
        # decay rate well under the cutoff, window long enough to resolve it
        t = np.linspace(0.0, 60.0, 1201)
        F = fractional_harmonic_content(power_spectrum(t, np.exp(-t / 8.0)))
        assert F < 0.1

    def test_lorentzian_tail_fraction(self):
        # decay rate set so the cutoff sits at twice the Lorentzian pole:
        # tail fraction 1 - (2/pi) arctan(2), up to leakage
        tau = 2.0 / HARMONIC_CUTOFF
        t = np.linspace(0.0, 20.0 * tau, 4001)
        F = fractional_harmonic_content(power_spectrum(t, np.exp(-t / tau)))
        assert F == pytest.approx(1.0 - np.arctan(2.0) / (np.pi / 2.0), abs=0.025)

    @given(scale=st.floats(0.01, 100.0), offset=st.floats(-5.0, 5.0))
    @settings(max_examples=25, deadline=None)
    def test_scale_and_offset_invariance(self, scale, offset):
        # loose tolerance: the subtracted baseline comes from a fit whose
        # converged offset is not exactly scale-equivariant
        t = np.linspace(0.0, 10.0, 501)
        y = np.cos(TWO_PI * 0.9 * t) * np.exp(-t / 6.0)
        base = fractional_harmonic_content(power_spectrum(t, y))
        moved = fractional_harmonic_content(power_spectrum(t, scale * y + offset))
        assert moved == pytest.approx(base, abs=5e-3)

    @given(cutoff=st.floats(0.05, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_bounded_and_monotone_in_cutoff(self, cutoff):
        t = np.linspace(0.0, 10.0, 501)
        y = np.cos(TWO_PI * 0.9 * t) + 0.5 * np.exp(-t / 2.0)
        s = power_spectrum(t, y)
        f_lo = fractional_harmonic_content(s, TWO_PI * cutoff)
        f_hi = fractional_harmonic_content(s, TWO_PI * (cutoff + 0.5))
        assert 0.0 <= f_hi <= f_lo <= 1.0

    def test_cutoff_outside_range_rejected(self):
        t = np.linspace(0.0, 1.0, 11)
        s = power_spectrum(t, np.cos(TWO_PI * t))
        with pytest.raises(AnalysisError):
            fractional_harmonic_content(s, TWO_PI * 100.0)


class TestExponentialFit:
    def test_exact_roundtrip(self):
        t = np.linspace(0.0, 20.0, 201)
        fit = fit_exponential(t, 0.8 * np.exp(-t / 3.2) + 0.1)
        assert fit.identifiable
        assert fit.amplitude == pytest.approx(0.8, abs=1e-8)
        assert fit.tau == pytest.approx(3.2, abs=1e-8)
        assert fit.offset == pytest.approx(0.1, abs=1e-8)
        assert fit.residual_norm < 1e-10

    def test_constant_series_not_identifiable(self):
        fit = fit_exponential(np.linspace(0.0, 5.0, 50), np.full(50, 0.3))
        assert not fit.identifiable
        assert np.isnan(fit.tau)
        assert fit.offset == pytest.approx(0.3)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_exponential([0.0, 1.0], [1.0, 0.5])

    @given(tau=st.floats(0.5, 30.0), amp=st.floats(0.1, 2.0))
    @settings(max_examples=20, deadline=None)
    def test_recovers_generated_decays(self, tau, amp):
        t = np.linspace(0.0, 3.0 * tau, 160)
        fit = fit_exponential(t, amp * np.exp(-t / tau) - 0.2)
        assert fit.tau == pytest.approx(tau, rel=1e-4)


class TestGaussianEnvelopeFit:
    def test_exact_roundtrip(self):
        t = np.linspace(0.0, 4.0, 401)
        y = 0.5 * np.exp(-((t / 1.3) ** 2)) * np.cos(TWO_PI * 3.0 * t + 0.4) + 0.5
        fit = fit_gaussian_envelope(t, y)
        assert fit.good_fit
        assert fit.tau_g == pytest.approx(1.3, abs=1e-6)
        assert fit.frequency == pytest.approx(3.0, abs=1e-6)
        assert fit.phase == pytest.approx(0.4, abs=1e-6)

    def test_monotone_series_rejected(self):
        t = np.linspace(0.0, 5.0, 100)
        with pytest.raises(FitError, match="extrema"):
            fit_gaussian_envelope(t, np.exp(-t / 2.0))

    def test_beating_signal_flagged(self):
        # two-tone beat: a single-frequency envelope model cannot track it,
        # the residual gate marks the fit
        t = np.linspace(0.0, 6.0, 601)
        y = 0.5 * (np.cos(TWO_PI * 2.0 * t) + np.cos(TWO_PI * 2.8 * t)) \
            * np.exp(-((t / 3.0) ** 2))
        fit = fit_gaussian_envelope(t, y)
        assert not fit.good_fit


class TestChernNumber:
    def test_qwz_phases(self):
        assert chern_number(qwz_grid(1.0)) == 1
        assert chern_number(qwz_grid(-1.0)) == -1
        assert chern_number(qwz_grid(3.0)) == 0
        assert chern_number(qwz_grid(-3.0)) == 0

    def test_refinement_stable(self):
        for n in (12, 24, 48):
            assert chern_number(qwz_grid(1.0, n)) == 1

    def test_small_perturbation_cannot_move_integer(self):
        rng = np.random.default_rng(0)
        base = qwz_grid(1.0)
        d = base.d_field + 0.01 * rng.normal(size=base.d_field.shape)
        assert chern_number(TorusGrid(24, 24, d)) == 1

    def test_trivial_uniform_field(self):
        d = np.zeros((12, 12, 3))
        d[..., 2] = 1.0
        assert chern_number(TorusGrid(12, 12, d)) == 0

    def test_gap_closure_raises(self):
        d = np.ones((8, 8, 3))
        d[3, 4] = 0.0
        with pytest.raises(AnalysisError, match="gap"):
            chern_number(TorusGrid(8, 8, d))


class TestPumpTorus:
    def test_window_controls_chern(self):
        fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
        inside = pump_torus(fp, g=13.0, n=4.0)
        outside = pump_torus(fp, g=13.0, n=25.0)
        assert chern_number(inside) == -1
        assert chern_number(outside) == 0
        assert topological_window(fp, 4.0, g=13.0).inside
        assert not topological_window(fp, 25.0, g=13.0).inside

    def test_doubled_convention_shifts_window(self):
        fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
        v1 = topological_window(fp, 4.0, g=13.0)
        v2 = topological_window(fp, 4.0, g=13.0, doubled=True)
        assert v2.amplitude == pytest.approx(2.0 * v1.amplitude)
        assert v1.inside and not v2.inside

    def test_grid_min_gap(self):
        fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
        g = pump_torus(fp, g=13.0, n=4.0)
        assert g.min_gap > 0.0

    def test_negative_photon_number_rejected(self):
        fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
        with pytest.raises(AnalysisError):
            topological_window(fp, -1.0)


class TestPumpRate:
    def test_exact_line(self):
        t = np.linspace(0.0, 10.0, 101)
        rate = pump_rate_estimate((t, 4.0 + 0.9 * t))
        assert rate.slope == pytest.approx(0.9, abs=1e-12)
        assert rate.stderr == pytest.approx(0.0, abs=1e-12)

    def test_window_restricts_samples(self):
        t = np.linspace(0.0, 10.0, 101)
        y = np.where(t < 5.0, 0.0, 2.0 * (t - 5.0))
        rate = pump_rate_estimate((t, y), t_window=(5.0, 10.0))
        assert rate.slope == pytest.approx(2.0, abs=1e-9)
        assert rate.window == (5.0, 10.0)

    def test_short_window_vs_period_rejected(self):
        t = np.linspace(0.0, 10.0, 101)
        with pytest.raises(AnalysisError, match="period"):
            pump_rate_estimate((t, t), t_window=(0.0, 4.0), period=1.0)
