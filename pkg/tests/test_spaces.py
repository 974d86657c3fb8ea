import numpy as np
import pytest

from floqlab.spaces import (HilbertSpace, SpaceError, assert_hermitian,
                            build_elementary)


def test_dims_and_total_dimension():
    s = HilbertSpace(qubit_levels=2, cavity_dims=(5, 3))
    assert s.dims == (2, 5, 3)
    assert s.dim == 30
    assert s.n_cavities == 2


def test_invalid_spaces_rejected():
    with pytest.raises(SpaceError):
        HilbertSpace(qubit_levels=1)
    with pytest.raises(SpaceError):
        HilbertSpace(cavity_dims=(1,))


def test_two_level_basis_order_excited_first():
    s = HilbertSpace()
    sz = build_elementary(s, "sigma_z")
    e = s.basis_state("e")
    g = s.basis_state("g")
    assert np.allclose(sz @ e, e)
    assert np.allclose(sz @ g, -g)
    assert np.allclose(e, [1.0, 0.0])


def test_pauli_algebra():
    s = HilbertSpace()
    sx = build_elementary(s, "sigma_x")
    sy = build_elementary(s, "sigma_y")
    sz = build_elementary(s, "sigma_z")
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    assert np.allclose(sx @ sx, np.eye(2))
    sp = build_elementary(s, "sigma_plus")
    assert np.allclose(sp, (sx + 1j * sy) / 2.0)
    # sigma_plus raises |g> to |e>
    assert np.allclose(sp @ s.basis_state("g"), s.basis_state("e"))


def test_cavity_ladder_and_number():
    s = HilbertSpace(cavity_dims=(4,))
    a = build_elementary(s, "a", subsystem=1)
    adag = build_elementary(s, "adag", subsystem=1)
    n = build_elementary(s, "number", subsystem=1)
    assert np.allclose(adag @ a, n)
    # commutator [a, adag] = 1 except at the truncation edge
    comm = a @ adag - adag @ a
    eye = np.eye(s.dim)
    edge = s.top_level_projector()
    assert np.allclose(comm, eye - 4 * edge)


def test_embed_acts_on_named_subsystem_only():
    s = HilbertSpace(cavity_dims=(3,))
    n = build_elementary(s, "number", subsystem=1)
    state = s.basis_state("g", fock=(2,))
    assert np.allclose(n @ state, 2.0 * state)
    sz = build_elementary(s, "sigma_z")
    assert np.allclose(sz @ state, -state)


def test_multilevel_drive_has_sqrt_weights():
    s = HilbertSpace(qubit_levels=3)
    d = build_elementary(s, "drive")
    assert np.isclose(d[0, 1], 1.0)
    assert np.isclose(d[1, 2], np.sqrt(2.0))
    assert_hermitian(d)


def test_unknown_kinds_rejected():
    s = HilbertSpace(cavity_dims=(3,))
    with pytest.raises(SpaceError):
        build_elementary(s, "number")  # cavity kind on the qubit
    with pytest.raises(SpaceError):
        build_elementary(s, "sigma_x", subsystem=1)
    with pytest.raises(SpaceError):
        build_elementary(s, "a", subsystem=2)  # no second cavity


def test_assert_hermitian_raises_on_defect():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(SpaceError):
        assert_hermitian(bad)
