import numpy as np
import pytest

from floqlab.hamiltonians import FieldParams, field_vector
from floqlab.schedules import (Schedule, ScheduleError, Waveform, apply_delay,
                               chain, circular_field, elliptic_field,
                               lz_delay_schedule, ramp_in, ramp_out,
                               schedule_source, staged_shutoff, trapezoid)


def test_waveform_sample_and_hold():
    w = Waveform(dt=0.5, samples=np.array([1.0, 2.0, 3.0]), t0=1.0)
    assert w.duration == pytest.approx(1.5)
    assert w.end == pytest.approx(2.5)
    assert w.value(1.1) == 1.0
    assert w.value(1.6) == 2.0
    # held at the edges
    assert w.value(-5.0) == 1.0
    assert w.value(99.0) == 3.0


def test_waveform_validation():
    with pytest.raises(ScheduleError):
        Waveform(dt=0.0, samples=np.zeros(3))
    with pytest.raises(ScheduleError):
        Waveform(dt=1.0, samples=np.array([1.0, np.nan]))


def test_trapezoid_flat_top_and_ramps():
    w = trapezoid(10.0, t_start=0.2, t_stop=1.0, ramp=0.1, dt=1e-3)
    t = w.times
    flat = (t > 0.35) & (t < 0.85)
    assert np.allclose(w.value(t[flat]), 10.0)
    assert np.all(w.value(t[t < 0.19]) == 0.0)
    with pytest.raises(ScheduleError):
        trapezoid(10.0, t_start=0.0, t_stop=0.1, ramp=0.2)


def test_circular_field_traces_circle():
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    s = circular_field(fp, duration=1.0)
    x, z = s.field_at(s.x_channel.times)
    assert np.allclose(np.hypot(x, z), 20.0, atol=1e-6)


def test_elliptic_field_adds_m_offset():
    fp = FieldParams(b0=20.0, m=0.6, omega_mod=1.0)
    ell = elliptic_field(fp, duration=1.0)
    t = ell.x_channel.times
    bx, bz = field_vector(fp, t)
    x, z = ell.field_at(t)
    assert np.allclose(x, bx, atol=1e-9)
    assert np.allclose(z, bz, atol=1e-9)


def test_lz_delay_schedule_flip_window():
    s = lz_delay_schedule(omega=30.0, delta=100.0, tau=2.0, tau_del=0.5,
                          fbl_width=1.0)
    t = s.x_channel.times
    _, z = s.field_at(t)
    assert np.allclose(np.unique(z), [-100.0, 100.0])
    inside = (t > 0.51) & (t < 1.49)
    assert np.all(z[inside] == 100.0)
    outside = (t < 0.49) | (t > 1.51)
    assert np.all(z[outside] == -100.0)
    x, _ = s.field_at(t)
    assert np.all(x[t > 2.01] == 0.0)


def test_apply_delay_shifts_z_and_markers():
    s = lz_delay_schedule(omega=30.0, delta=100.0, tau=2.0, tau_del=0.5)
    d = apply_delay(s, 0.3)
    assert d.z_delay == pytest.approx(0.3)
    assert d.markers["drive_end"] == pytest.approx(s.markers["drive_end"] + 0.3)
    # zero delay returns the schedule unchanged
    assert apply_delay(s, 0.0) is s
    # z content arrives late by exactly the delay
    t_probe = 0.5 + 0.3 + 0.01
    assert d.field_at(t_probe)[1] == 100.0
    assert d.field_at(0.5 + 0.01)[1] == -100.0


def test_ramp_in_starts_far_detuned_and_lands_on_field():
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    s = ramp_in(fp)
    x0, z0 = field_vector(fp, 0.0)
    x_start, z_start = s.field_at(0.0)
    assert abs(z_start) >= 4.0 * fp.b0 - 1.0
    assert abs(x_start) < abs(x0) * 0.05
    x_end, z_end = s.field_at(s.duration - 1e-4)
    assert x_end == pytest.approx(x0, rel=0.02)
    assert z_end == pytest.approx(z0, abs=0.5)


def test_ramp_out_never_sweeps_through_zero():
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    for sign in (+1.0, -1.0):
        s = ramp_out(fp, freeze_x=sign * 12.0, freeze_z=5.0)
        t = s.x_channel.times
        x, z = s.field_at(t)
        # the x channel keeps its frozen sign while on
        on = np.abs(x) > 1e-9
        assert np.all(np.sign(x[on]) == sign)
        # the gap closes once at the final shutoff and never reopens
        mag = np.hypot(x, z)
        below = np.nonzero(mag < 3.0)[0]
        assert below.size > 0 and np.all(np.diff(below) == 1)
        assert below[-1] == len(t) - 1


def test_staged_shutoff_axis_order():
    s = staged_shutoff("z", freeze_x=10.0, freeze_z=5.0, hold=0.05, stage=0.05)
    t = s.x_channel.times
    x, z = s.field_at(t)
    # x is off while z still holds
    mid = (t > 0.06) & (t < 0.09)
    assert np.all(np.abs(x[mid]) < 1e-9)
    assert np.allclose(z[mid], 5.0)
    with pytest.raises(ScheduleError):
        staged_shutoff("y", 1.0, 1.0)


def test_chain_concatenates_and_offsets_markers():
    fp = FieldParams(b0=20.0, m=0.0, omega_mod=1.0)
    a = circular_field(fp, duration=0.5)
    b = circular_field(fp, duration=0.25)
    c = chain(a, b)
    assert c.duration == pytest.approx(0.75, abs=1e-6)
    assert c.markers["rotation_end"] == pytest.approx(0.5 + 0.25)
    with pytest.raises(ScheduleError):
        chain(a, apply_delay(b, 0.1))


def test_schedule_roundtrip_through_json(tmp_path):
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    s = apply_delay(circular_field(fp, 0.5), 0.2).with_markers(extra=0.1)
    path = tmp_path / "sched.json"
    s.save(path)
    back = Schedule.load(path)
    assert back.z_delay == pytest.approx(0.2)
    assert back.markers["extra"] == pytest.approx(0.1)
    assert np.allclose(back.x_channel.samples, s.x_channel.samples)


def test_schedule_source_pauli_mapping():
    x = Waveform(dt=0.1, samples=np.full(10, 6.0))
    z = Waveform(dt=0.1, samples=np.full(10, 8.0))
    src = schedule_source(Schedule(x_channel=x, z_channel=z))
    h = src(np.array([0.35]))[0]
    w = 2.0 * np.pi
    assert h[0, 0] == pytest.approx(0.5 * w * 8.0)
    assert h[0, 1] == pytest.approx(0.5 * w * 6.0)
