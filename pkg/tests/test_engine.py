import numpy as np
import pytest
from scipy.linalg import expm

from floqlab.engine import (EngineError, NoiseModel, TruncationOverflowError,
                            apply_readout_error, as_source,
                            collapse_operators, expectation,
                            propagate_lindblad, propagate_unitary,
                            quasistatic_average, sample_shots, sweep)
from floqlab.hamiltonians import qubit_field_source
from floqlab.spaces import HilbertSpace, build_elementary
from floqlab.units import angular

PROJ_E = np.diag([1.0, 0.0]).astype(complex)
EXCITED = np.array([1.0, 0.0], dtype=complex)
GROUND = np.array([0.0, 1.0], dtype=complex)


def random_hermitian(rng, dim, scale=20.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return angular(scale) * (a + a.conj().T) / (2.0 * np.sqrt(dim))


def piecewise_source(h_list, t_edges):
    """H(t) constant on [t_edges[k], t_edges[k+1])."""
    h_stack = np.stack(h_list)

    def source(times):
        idx = np.clip(np.searchsorted(t_edges, times, side="right") - 1,
                      0, len(h_list) - 1)
        return h_stack[idx]

    return source


class TestNoiseModel:
    def test_rejects_nonpositive_times(self):
        with pytest.raises(ValueError, match="t1"):
            NoiseModel(t1=-1.0)
        with pytest.raises(ValueError, match="tphi"):
            NoiseModel(tphi=0.0)
        with pytest.raises(ValueError):
            NoiseModel(sigma_quasistatic=-0.1)
        with pytest.raises(ValueError):
            NoiseModel(readout_error=(1.2, 0.0))

    def test_any_markovian(self):
        assert not NoiseModel().any_markovian
        assert not NoiseModel(sigma_quasistatic=0.4).any_markovian
        assert NoiseModel(t1=10.0).any_markovian
        assert NoiseModel(kappa_m=84.0).any_markovian

    def test_collapse_rates(self):
        s = HilbertSpace()
        ops = collapse_operators(NoiseModel(t1=4.0, tphi=8.0), s)
        sm = build_elementary(s, "sigma_minus")
        sz = build_elementary(s, "sigma_z")
        assert np.allclose(ops[0], 0.5 * sm)          # sqrt(1/4)
        assert np.allclose(ops[1], 0.25 * sz)         # sqrt(1/16)


class TestAsSource:
    def test_constant_matrix(self):
        h = np.diag([1.0, -1.0]).astype(complex)
        stack = as_source(h)(np.zeros(4))
        assert stack.shape == (4, 2, 2)

    def test_scalar_callable_wrapped(self):
        src = as_source(lambda t: np.cos(t) * np.eye(2, dtype=complex))
        stack = src(np.array([0.0, np.pi]))
        assert np.allclose(stack[0], np.eye(2))
        assert np.allclose(stack[1], -np.eye(2))

    def test_rejects_non_hamiltonian(self):
        with pytest.raises(TypeError):
            as_source(42)


class TestUnitaryOracle:
    """Engine vs dense matrix-exponential products on random problems."""

    @pytest.mark.parametrize("dim", [2, 5, 12])
    def test_matches_dense_expm(self, dim):
        rng = np.random.default_rng(dim)
        n_seg = 6
        t_edges = np.linspace(0.0, 0.3, n_seg + 1)
        h_list = [random_hermitian(rng, dim) for _ in range(n_seg)]
        psi0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi0 = psi0 / np.linalg.norm(psi0)

        res = propagate_unitary(piecewise_source(h_list, t_edges), psi0,
                                t_edges, store_states=True)
        psi_ref = psi0.copy()
        for k in range(n_seg):
            dt = t_edges[k + 1] - t_edges[k]
            psi_ref = expm(-1j * h_list[k] * dt) @ psi_ref
            fid = abs(np.vdot(psi_ref, res.states[k + 1])) ** 2
            assert 1.0 - fid < 1e-9

    def test_norm_preserved_on_smooth_drive(self):
        src = qubit_field_source(lambda t: 25.0 * np.cos(angular(3.0) * t),
                                 lambda t: 10.0 * np.sin(angular(1.0) * t))
        res = propagate_unitary(src, GROUND, np.linspace(0.0, 5.0, 401),
                                store_states=True)
        norms = [abs(np.vdot(s, s)) for s in res.states]
        assert max(abs(n - 1.0) for n in norms) < 1e-8

    def test_rabi_flop_analytic(self):
        # resonant drive: P(e) = sin^2(Omega t / 2)
        omega = 25.0
        h = 0.5 * angular(omega) * np.array([[0, 1], [1, 0]], dtype=complex)
        t = np.linspace(0.0, 0.2, 101)
        res = propagate_unitary(h, GROUND, t, observables={"pe": PROJ_E})
        expected = np.sin(0.5 * angular(omega) * t) ** 2
        assert np.max(np.abs(res.column("pe") - expected)) < 1e-9

    def test_rejects_unnormalized_state(self):
        with pytest.raises(EngineError, match="normalized"):
            propagate_unitary(np.zeros((2, 2), dtype=complex),
                              2.0 * EXCITED, [0.0, 1.0])

    def test_rejects_decreasing_grid(self):
        with pytest.raises(EngineError):
            propagate_unitary(np.zeros((2, 2), dtype=complex), EXCITED,
                              [0.0, 1.0, 0.5])

    def test_truncation_guard_fires(self):
        space = HilbertSpace(cavity_dims=(3,))
        # drive the cavity hard: H = amp (a + adag)
        a = build_elementary(space, "a", 1)
        h = angular(30.0) * (a + a.conj().T)
        psi0 = space.basis_state("g", fock=(0,))
        with pytest.raises(TruncationOverflowError):
            propagate_unitary(h, psi0, np.linspace(0.0, 0.5, 21), space=space)


class TestLindbladOracle:
    def test_matches_dense_superoperator(self):
        rng = np.random.default_rng(7)
        dim = 4
        n_seg = 4
        t_edges = np.linspace(0.0, 0.4, n_seg + 1)
        h_list = [random_hermitian(rng, dim, scale=8.0) for _ in range(n_seg)]
        c1 = 0.6 * (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        rho0 = np.outer(psi, psi.conj())

        res = propagate_lindblad(piecewise_source(h_list, t_edges), rho0,
                                 t_edges, collapse_ops=[c1], store_states=True)

        eye = np.eye(dim)
        cdc = c1.conj().T @ c1
        d_part = (np.kron(c1, c1.conj())
                  - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
        rho_ref = rho0.copy()
        for k in range(n_seg):
            dt = t_edges[k + 1] - t_edges[k]
            liou = -1j * (np.kron(h_list[k], eye) - np.kron(eye, h_list[k].T)) + d_part
            rho_ref = (expm(liou * dt) @ rho_ref.reshape(-1)).reshape(dim, dim)
            defect = np.abs(rho_ref - res.states[k + 1]).max()
            assert defect < 1e-9

    def test_t1_decay_exact(self):
        s = HilbertSpace()
        t = np.linspace(0.0, 30.0, 16)
        res = propagate_lindblad(np.zeros((2, 2), dtype=complex),
                                 np.outer(EXCITED, EXCITED), t,
                                 noise=NoiseModel(t1=11.5), space=s,
                                 observables={"pe": PROJ_E})
        assert np.allclose(res.column("pe"), np.exp(-t / 11.5), atol=1e-10)

    def test_trace_preserved_with_drive_and_noise(self):
        s = HilbertSpace()
        src = qubit_field_source(lambda t: 20.0 + 0.0 * t, lambda t: 5.0 + 0.0 * t)
        res = propagate_lindblad(src, np.outer(GROUND, GROUND),
                                 np.linspace(0.0, 4.0, 81),
                                 noise=NoiseModel(t1=11.5, tphi=3.45), space=s,
                                 store_states=True)
        traces = [abs(np.trace(r).real - 1.0) for r in res.states]
        assert max(traces) < 1e-7
        # dephasing + relaxation keep every snapshot PSD
        assert min(np.linalg.eigvalsh(r).min() for r in res.states) > -1e-7

    def test_rejects_bad_rho(self):
        with pytest.raises(EngineError, match="trace"):
            propagate_lindblad(np.zeros((2, 2), dtype=complex),
                               2.0 * np.outer(EXCITED, EXCITED), [0.0, 1.0])


class TestQuasistaticAverage:
    def _run(self, offset):
        h = qubit_field_source(lambda t: 10.0 + 0.0 * t,
                               lambda t: offset + 0.0 * t)
        return propagate_unitary(h, GROUND, np.linspace(0.0, 1.0, 51),
                                 observables={"pe": PROJ_E})

    def test_deterministic_for_seed(self):
        a = quasistatic_average(self._run, 0.4, 16, seed=3)
        b = quasistatic_average(self._run, 0.4, 16, seed=3)
        assert np.array_equal(a.column("pe"), b.column("pe"))
        c = quasistatic_average(self._run, 0.4, 16, seed=4)
        assert not np.array_equal(a.column("pe"), c.column("pe"))

    def test_zero_sigma_equals_single_run(self):
        avg = quasistatic_average(self._run, 0.0, 8, seed=0)
        one = self._run(0.0)
        assert np.allclose(avg.column("pe"), one.column("pe"))

    def test_averaging_damps_oscillation(self):
        # frozen detuning spread dephases the late-time oscillation
        avg = quasistatic_average(self._run, 8.0, 256, seed=1)
        bare = self._run(0.0)
        late = slice(30, None)
        assert np.ptp(avg.column("pe")[late]) < np.ptp(bare.column("pe")[late])


class TestReadoutAndShots:
    def test_confusion_matrix_map(self):
        p = apply_readout_error(np.array([0.0, 1.0, 0.5]), (0.02, 0.05))
        assert np.allclose(p, [0.02, 0.95, 0.485])

    def test_shots_deterministic_and_unbiased(self):
        rng = np.random.default_rng(0)
        p = sample_shots(0.3 * np.ones(2000), shots=400, rng=rng)
        assert abs(p.mean() - 0.3) < 0.005
        rng2 = np.random.default_rng(0)
        assert np.array_equal(p, sample_shots(0.3 * np.ones(2000), 400, rng2))


class TestSweep:
    @staticmethod
    def _job(point, seed):
        rng = np.random.default_rng(seed)
        return {"x": point["x"], "draw": float(rng.uniform())}

    def test_results_independent_of_order_and_threads(self):
        grid = [{"x": k} for k in range(8)]
        a = sweep(grid, self._job, seed=5)
        b = sweep(list(reversed(grid)), self._job, seed=5, threads=4)
        by_x_a = {r["x"]: r["draw"] for r in a.results}
        by_x_b = {r["x"]: r["draw"] for r in b.results}
        assert by_x_a == by_x_b

    def test_seed_changes_draws(self):
        grid = [{"x": 0}]
        a = sweep(grid, self._job, seed=1)
        b = sweep(grid, self._job, seed=2)
        assert a.results[0]["draw"] != b.results[0]["draw"]

    def test_failures_recorded_not_raised(self):
        def job(point, seed):
            if point["x"] == 1:
                raise ValueError("boom")
            return point["x"]

        out = sweep([{"x": 0}, {"x": 1}, {"x": 2}], job)
        assert not out.ok
        assert out.results[0] == 0 and out.results[2] == 2
        assert out.results[1] is None
        assert "ValueError" in out.errors[1]


def test_expectation_handles_kets_and_densities():
    assert expectation(EXCITED, PROJ_E) == pytest.approx(1.0)
    rho = 0.25 * np.outer(EXCITED, EXCITED) + 0.75 * np.outer(GROUND, GROUND)
    assert expectation(rho, PROJ_E) == pytest.approx(0.25)
