import numpy as np
import pytest

from floqlab.hamiltonians import (DegenerateSpectrumError, DeviceParams,
                                  FieldParams, field_vector,
                                  flux_to_frequency, instantaneous_eigenbasis,
                                  jaynes_cummings_hamiltonian, pump_hamiltonian,
                                  pump_source, qubit_field_source,
                                  rotating_frame_hamiltonian, static_source,
                                  transmon_hamiltonian)
from floqlab.spaces import HilbertSpace, SpaceError, assert_hermitian
from floqlab.units import GOLDEN_RATIO, angular


def test_device_params_defaults_positive():
    p = DeviceParams()
    assert p.alpha > 0 and p.g_boost > 0 and p.kappa_m > 0
    assert p.omega_q_range[0] < p.omega_q_range[1]


def test_device_params_reject_negative_rates():
    with pytest.raises(ValueError):
        DeviceParams(alpha=-1.0)
    with pytest.raises(ValueError):
        DeviceParams(omega_q_range=(7.4, 3.9))
    with pytest.raises(ValueError):
        DeviceParams(ej_ratio=0.5)


def test_field_params_delta_defaults_to_golden_multiple():
    fp = FieldParams(omega_mod=2.0)
    assert np.isclose(fp.delta_resolved, 2.0 * GOLDEN_RATIO)
    assert np.isclose(FieldParams(delta=7.0).delta_resolved, 7.0)
    assert np.isclose(fp.period, 0.5)


def test_field_vector_elliptic_vs_circular():
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    bx, bz = field_vector(fp, 0.0)
    assert np.isclose(bx, 40.0) and np.isclose(bz, 0.0)
    # quarter period: cos term gone, sin maximal
    bx, bz = field_vector(fp, 0.25)
    assert np.isclose(bx, 20.0) and np.isclose(bz, 20.0)
    bx, _ = field_vector(fp, 0.0, circular=True)
    assert np.isclose(bx, 20.0)


def test_field_vector_periodicity():
    fp = FieldParams(b0=13.0, m=0.4, omega_mod=2.5)
    t = np.linspace(0.0, 1.0, 7)
    a = field_vector(fp, t)
    b = field_vector(fp, t + fp.period)
    assert np.allclose(a, b)


def test_flux_to_frequency_endpoints():
    p = DeviceParams()
    assert np.isclose(flux_to_frequency(p, 0.0), p.omega_q_range[1])
    # half quantum: sqrt(d) suppression
    d = (p.ej_ratio - 1.0) / (p.ej_ratio + 1.0)
    assert np.isclose(flux_to_frequency(p, 0.5), p.omega_q_range[1] * np.sqrt(d))


def test_transmon_anharmonic_ladder():
    s = HilbertSpace(qubit_levels=3)
    h = transmon_hamiltonian(s, omega_q=4.7e3, alpha=240.0)
    e = np.sort(np.diag(h).real)
    # second gap smaller than the first by alpha
    gap01 = e[1] - e[0]
    gap12 = e[2] - e[1]
    assert np.isclose(gap01 - gap12, angular(240.0))


def test_rotating_frame_limits():
    s = HilbertSpace()
    h = rotating_frame_hamiltonian(s, delta=0.0, qubit_detuning=0.0,
                                   drive_amp=10.0)
    assert np.allclose(h, 0.5 * angular(10.0) * np.array([[0, 1], [1, 0]]))
    with pytest.raises(SpaceError):
        rotating_frame_hamiltonian(s, 0.0, 0.0, 10.0, g=5.0)


def test_jc_conserves_excitation_number_without_drive():
    s = HilbertSpace(cavity_dims=(4,))
    h = jaynes_cummings_hamiltonian(s, DeviceParams(), omega_d=5.0,
                                    omega_drive_amp=0.0, t=0.0)
    assert_hermitian(h)
    n_exc = (np.kron(np.diag([1.0, 0.0]), np.eye(4))
             + np.kron(np.eye(2), np.diag(np.arange(4.0))))
    assert np.allclose(h @ n_exc, n_exc @ h)


def test_pump_hamiltonian_matches_field_components():
    s = HilbertSpace(cavity_dims=(3,))
    fp = FieldParams(b0=20.0, m=1.0, omega_mod=1.0)
    t = 0.37
    h = pump_hamiltonian(s, fp, t, g=0.0)
    bx, bz = field_vector(fp, t)
    qubit_block = h.reshape(2, 3, 2, 3)[:, 0, :, 0]
    expected = 0.5 * angular(bx) * np.array([[0, 1], [1, 0]]) \
        + 0.5 * angular(bz) * np.diag([1.0, -1.0])
    assert np.allclose(qubit_block, expected)


def test_pump_source_stacks_match_pointwise_hamiltonian():
    s = HilbertSpace(cavity_dims=(4,))
    fp = FieldParams(b0=15.0, m=0.7, omega_mod=1.3)
    src = pump_source(s, fp, g=5.0)
    times = np.array([0.0, 0.21, 0.9])
    stack = src(times)
    assert stack.shape == (3, s.dim, s.dim)
    for k, t in enumerate(times):
        assert np.allclose(stack[k], pump_hamiltonian(s, fp, float(t), g=5.0))


def test_qubit_field_source_pauli_coefficients():
    src = qubit_field_source(lambda t: 0.0 * t + 6.0, lambda t: 8.0 * t)
    h = src(np.array([0.0, 1.0]))
    assert np.allclose(h[0], 0.5 * angular(6.0) * np.array([[0, 1], [1, 0]]))
    assert np.allclose(h[1], 0.5 * angular(6.0) * np.array([[0, 1], [1, 0]])
                       + 0.5 * angular(8.0) * np.diag([1.0, -1.0]))


def test_static_source_broadcasts():
    h0 = np.diag([1.0, -1.0]).astype(complex)
    stack = static_source(h0)(np.zeros(5))
    assert stack.shape == (5, 2, 2)
    assert np.allclose(stack[3], h0)


def test_instantaneous_eigenbasis_gauge_and_order():
    h = 0.5 * angular(10.0) * np.array([[0.0, 1.0], [1.0, 0.0]])
    evals, evecs = instantaneous_eigenbasis(h)
    assert evals[0] < evals[1]
    # gauge: dominant component real positive
    for k in range(2):
        j = np.argmax(np.abs(evecs[:, k]))
        assert evecs[j, k].real > 0 and abs(evecs[j, k].imag) < 1e-12
        assert np.allclose(h @ evecs[:, k], evals[k] * evecs[:, k])


def test_instantaneous_eigenbasis_rejects_degeneracy():
    with pytest.raises(DegenerateSpectrumError):
        instantaneous_eigenbasis(np.eye(2))
