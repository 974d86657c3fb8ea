import numpy as np
import pytest

from floqlab.filters import (FilterError, Kernel, convolve,
                             precompensation_kernel, ripple_metric,
                             synth_lowpass_kernel)
from floqlab.schedules import Waveform


@pytest.fixture(scope="module")
def kernel():
    return synth_lowpass_kernel(cutoff=6.0, dt=1e-3)


def square_pulse(width=1.0, start=1.0, dt=1e-3):
    n = int(round((2 * start + width) / dt))
    s = np.zeros(n)
    i0 = int(round(start / dt))
    s[i0:i0 + int(round(width / dt))] = 1.0
    return Waveform(dt=dt, samples=s)


class TestKernel:
    def test_validation(self):
        with pytest.raises(FilterError):
            Kernel(dt=0.0, taps=[1.0])
        with pytest.raises(FilterError):
            Kernel(dt=1e-3, taps=[[1.0, 2.0]])
        with pytest.raises(FilterError):
            Kernel(dt=1e-3, taps=[np.inf])

    def test_gain_and_centroid(self):
        k = Kernel(dt=0.5, taps=[0.0, 1.0, 1.0])
        assert k.gain == pytest.approx(2.0)
        assert k.group_delay == pytest.approx(0.75)
        assert k.normalized().gain == pytest.approx(1.0)

    def test_zero_gain_rejected(self):
        k = Kernel(dt=1e-3, taps=[1.0, -1.0])
        with pytest.raises(FilterError):
            k.normalized()
        with pytest.raises(FilterError):
            _ = k.group_delay

    def test_response_at_dc_equals_gain(self):
        k = Kernel(dt=1e-3, taps=[0.2, 0.5, 0.3])
        assert k.response_at(0.0) == pytest.approx(1.0)

    def test_text_roundtrip(self, kernel):
        back = Kernel.from_text(kernel.to_text())
        assert back.dt == kernel.dt
        assert np.array_equal(back.taps, kernel.taps)
        with pytest.raises(FilterError):
            Kernel.from_text("0.1\n0.2\n")


class TestSynthKernel:
    def test_unity_gain_and_shape(self, kernel):
        assert kernel.gain == pytest.approx(1.0, abs=1e-12)
        assert len(kernel.taps) == 1272
        assert int(np.argmax(np.abs(kernel.taps))) == 131
        assert kernel.group_delay == pytest.approx(0.1112, abs=5e-4)

    def test_passband_flat_stopband_deep(self, kernel):
        h3 = 20.0 * np.log10(abs(kernel.response_at(3.0)))
        h12 = 20.0 * np.log10(abs(kernel.response_at(12.0)))
        assert h3 > -1.5
        assert h12 < -49.0

    def test_passband_monotone(self, kernel):
        freqs = np.linspace(0.0, 6.0, 61)
        mags = np.array([abs(kernel.response_at(f)) for f in freqs])
        # flat monotone passband (slack covers the truncation ripple)
        assert np.all(np.diff(mags) < 1e-5)
        assert mags.max() < 1.0 + 1e-4
        assert mags[0] == pytest.approx(1.0, abs=1e-9)

    def test_tail_rings(self, kernel):
        peak = int(np.argmax(np.abs(kernel.taps)))
        signs = np.sign(kernel.taps[peak:])
        changes = int(np.count_nonzero(np.diff(signs[signs != 0.0])))
        assert changes >= 5

    def test_unresolvable_cutoff_rejected(self):
        with pytest.raises(FilterError):
            synth_lowpass_kernel(cutoff=6.0, dt=0.02)
        with pytest.raises(FilterError):
            synth_lowpass_kernel(cutoff=-1.0)


class TestPrecompensation:
    def test_flipped_tail_keeps_unity_gain(self, kernel):
        pre = precompensation_kernel(kernel)
        assert pre.gain == pytest.approx(1.0, abs=1e-12)
        assert len(pre.taps) == len(kernel.taps)
        # the head is unchanged up to the renormalization factor
        peak = int(np.argmax(np.abs(kernel.taps)))
        ratio = pre.taps[peak] / kernel.taps[peak]
        assert np.allclose(pre.taps[:peak], ratio * kernel.taps[:peak])

    def test_no_tail_rejected(self):
        with pytest.raises(FilterError):
            precompensation_kernel(Kernel(dt=1e-3, taps=[0.2, 1.0, 0.4]))


class TestConvolveAndRipple:
    def test_convolve_preserves_dc_level(self, kernel):
        w = square_pulse()
        y = convolve(w, kernel)
        mid = (y.times > 1.4) & (y.times < 1.6)
        assert y.samples[(y.times > 1.4) & (y.times < 1.6)].mean() == \
            pytest.approx(1.0, abs=0.01)
        assert mid.any()

    def test_convolve_dt_mismatch(self, kernel):
        with pytest.raises(FilterError):
            convolve(Waveform(dt=2e-3, samples=np.ones(10)), kernel)

    def test_ripple_ratio_below_third(self, kernel):
        w = square_pulse()
        window = (1.2, 1.8)
        raw = ripple_metric(convolve(w, kernel), window)
        comp = ripple_metric(convolve(convolve(w, precompensation_kernel(kernel)),
                                      kernel), window)
        assert raw == pytest.approx(0.0526, abs=0.002)
        assert comp == pytest.approx(0.0096, abs=0.002)
        assert comp / raw <= 1.0 / 3.0

    def test_ripple_metric_empty_window(self, kernel):
        w = square_pulse()
        with pytest.raises(FilterError):
            ripple_metric(w, (50.0, 60.0))
