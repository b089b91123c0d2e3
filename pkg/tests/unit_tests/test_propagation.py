import math
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from rydsim.configuration import IntegratorConfig
from rydsim.errors import IntegrationError
from rydsim.operators import DensityMatrix, Level, LevelScheme, StateVector, basis_labels
from rydsim.propagation import evolve_lindblad, evolve_schrodinger, sample_grid
from rydsim.runner import gate_fidelity
from rydsim.schemes import Scheme, blockade_scenario, multiqubit_scenario, two_qubit_scenario
from rydsim.system import Hamiltonian, assemble_hamiltonian, collapse_rates

RABI = 2 * math.pi


def rabi_hamiltonian(t: float) -> np.ndarray:
    return np.array([[0.0, RABI / 2], [RABI / 2, 0.0]], dtype=complex)


def test_resonant_rabi_oscillation() -> None:
    cfg = IntegratorConfig(n_samples=41)
    traj = evolve_schrodinger(rabi_hamiltonian, [1.0, 0.0], cfg, t_final=1.5, labels=["g", "r"])
    np.testing.assert_allclose(traj.populations()[:, 1], np.sin(RABI * traj.times / 2) ** 2, atol=1e-8)
    assert traj.metadata["norm_drift"] < 1e-8
    assert list(traj.to_frame().columns) == ["t", "pop_g", "pop_r"]


def test_zero_hamiltonian_keeps_state() -> None:
    psi0 = np.array([0.6, 0.8j])
    traj = evolve_schrodinger(lambda t: np.zeros((2, 2), dtype=complex), psi0, t_final=3.0)
    np.testing.assert_allclose(traj.states[-1], psi0, atol=1e-12)


def test_fixed_rk4_matches_adaptive() -> None:
    times = tuple(np.linspace(0.0, 5.0, 11))
    adaptive = evolve_schrodinger(rabi_hamiltonian, [1.0, 0.0], IntegratorConfig(sample_times=times))
    fixed = evolve_schrodinger(
        rabi_hamiltonian, [1.0, 0.0], IntegratorConfig(method="fixed_rk4", fixed_step=1e-3, sample_times=times)
    )
    np.testing.assert_allclose(fixed.states, adaptive.states, atol=1e-8)


def test_decay_branches_into_leak_level() -> None:
    scheme = LevelScheme.with_leak()
    tau = 1.0
    ops = [math.sqrt(rate) * scheme.transition(level, Level.RYD) for level, rate in collapse_rates(tau).items()]
    rho0 = DensityMatrix(np.outer(scheme.ket(Level.RYD), scheme.ket(Level.RYD)))
    traj = evolve_lindblad(lambda t: np.zeros((4, 4), dtype=complex), ops, rho0, IntegratorConfig(n_samples=21), t_final=2.0)
    pops = traj.populations()
    decayed = 1.0 - np.exp(-traj.times / tau)
    np.testing.assert_allclose(pops[:, scheme.index(Level.RYD)], np.exp(-traj.times / tau), atol=1e-8)
    np.testing.assert_allclose(pops[:, scheme.index(Level.LEAK)], 0.75 * decayed, atol=1e-8)
    np.testing.assert_allclose(pops[:, scheme.index(Level.G0)], 0.125 * decayed, atol=1e-8)
    assert traj.metadata["trace_drift"] < 1e-8
    assert traj.metadata["min_eigenvalue"] > -1e-9


def test_lindblad_without_jumps_matches_schrodinger() -> None:
    scenario = blockade_scenario()
    h = assemble_hamiltonian(scenario)
    cfg = IntegratorConfig(n_samples=9)
    pure = evolve_schrodinger(h, scenario.initial_state, cfg, t_final=scenario.t_final)
    mixed = evolve_lindblad(h, [], DensityMatrix.from_state(scenario.initial_state), cfg, t_final=scenario.t_final)
    expected = np.einsum("ti,tj->tij", pure.states, pure.states.conj())
    np.testing.assert_allclose(mixed.states, expected, atol=1e-7)
    assert mixed.mixed and not pure.mixed


def test_pulse_edges_split_integration() -> None:
    scenario = blockade_scenario()
    traj = evolve_schrodinger(
        assemble_hamiltonian(scenario), scenario.initial_state, IntegratorConfig(n_samples=5), t_final=scenario.t_final
    )
    assert traj.metadata["segments"] == 3


def test_blockade_cutoff_rejects_weight_on_removed_states() -> None:
    scenario = blockade_scenario()
    h = assemble_hamiltonian(scenario)
    cfg = IntegratorConfig(n_samples=5, blockade_cutoff=h.static.real.max() / 2)
    rr = np.zeros(scenario.dim, dtype=complex)
    rr[-1] = 1.0
    with pytest.raises(ValueError):
        evolve_schrodinger(h, StateVector(rr), cfg, t_final=scenario.t_final)
    traj = evolve_schrodinger(h, scenario.initial_state, cfg, t_final=scenario.t_final)
    assert traj.metadata["subspace_dim"] == scenario.dim - 1
    assert traj.states.shape[1] == scenario.dim


def test_sample_grid() -> None:
    assert sample_grid(IntegratorConfig(n_samples=3), 2.0).tolist() == [0.0, 1.0, 2.0]
    assert sample_grid(IntegratorConfig(sample_times=(1.0, 0.5, 1.0)), None).tolist() == [0.5, 1.0]
    with pytest.raises(ValueError):
        sample_grid(IntegratorConfig(), None)
    with pytest.raises(ValueError):
        sample_grid(IntegratorConfig(sample_times=(-1.0, 1.0)), 2.0)
    with pytest.raises(ValueError):
        sample_grid(IntegratorConfig(sample_times=(3.0,)), 2.0)


def test_solver_failure_raises_integration_error(monkeypatch: pytest.MonkeyPatch) -> None:
    def failing(*args: object, **kwargs: object) -> SimpleNamespace:
        return SimpleNamespace(
            status=-1,
            message="Required step size is less than spacing between numbers.",
            t=np.array([0.0, 0.25]),
            y=np.zeros((2, 2), dtype=complex),
            nfev=7,
        )

    monkeypatch.setattr("rydsim.propagation.solve_ivp", failing)
    with pytest.raises(IntegrationError) as info:
        evolve_schrodinger(rabi_hamiltonian, [1.0, 0.0], t_final=1.0)
    assert info.value.time == 0.25


def test_window_spanning_the_run_matches_an_unwindowed_drive() -> None:
    lowering = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    always = Hamiltonian(
        static=np.zeros((2, 2), dtype=complex),
        coupling_ops=(lowering,),
        coupling_coeffs=(lambda t: RABI / 2,),
        drive_scales=(RABI,),
    )
    windowed = replace(always, coupling_windows=(((0.0, 1.5),),))
    for cfg in (IntegratorConfig(n_samples=7), IntegratorConfig(method="fixed_rk4", fixed_step=1e-2, n_samples=7)):
        expected = evolve_schrodinger(always, [1.0, 0.0], cfg, t_final=1.5)
        traj = evolve_schrodinger(windowed, [1.0, 0.0], cfg, t_final=1.5)
        np.testing.assert_allclose(traj.states, expected.states, atol=1e-12)
        np.testing.assert_allclose(traj.populations()[:, 1], np.sin(RABI * traj.times / 2) ** 2, atol=1e-6)


def test_time_reversal_returns_the_initial_state() -> None:
    scenario = two_qubit_scenario(Scheme.STRONG)
    h = assemble_hamiltonian(scenario)
    t_final = scenario.t_final
    forward = evolve_schrodinger(h, scenario.initial_state, IntegratorConfig(n_samples=2), t_final=t_final)
    backward = evolve_schrodinger(
        lambda t: -h(t_final - t), forward.states[-1], IntegratorConfig(n_samples=2), t_final=t_final
    )
    np.testing.assert_allclose(backward.states[-1], scenario.initial_state.amplitudes, atol=1e-6)


def test_all_zero_input_is_stationary() -> None:
    scenario = multiqubit_scenario(3, Scheme.STRONG)
    psi0 = StateVector.from_computational({"000": 1.0}, scenario.schemes)
    traj = evolve_schrodinger(assemble_hamiltonian(scenario), psi0, IntegratorConfig(n_samples=11), t_final=scenario.t_final)
    k = basis_labels(scenario.schemes).index("000")
    assert np.max(np.abs(traj.states[:, k] - 1.0)) < 1e-12
    assert np.max(np.abs(np.delete(traj.states, k, axis=1))) < 1e-12


def test_halving_tolerances_leaves_the_fidelity_unchanged() -> None:
    scenario = two_qubit_scenario(Scheme.RAMAN)
    fidelities = [
        gate_fidelity(scenario, IntegratorConfig(rel_tol=rel_tol, abs_tol=1e-2 * rel_tol))
        for rel_tol in (1e-8, 5e-9, 2.5e-9)
    ]
    assert abs(fidelities[1] - fidelities[0]) < 1e-7
    assert abs(fidelities[2] - fidelities[1]) < 1e-7
