import math

import numpy as np
import pytest

from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError
from rydsim.runner import (
    active_sources,
    error_report,
    gate_fidelity,
    run_scenario,
    sample_noise,
    simulate_scenario,
    strip_noise,
)
from rydsim.schemes import Scheme, blockade_scenario, parameter_set, sample_distance, two_qubit_scenario
from rydsim.system import DopplerSpec, InteractionSpec, NoiseSpec, positions_1d

KHZ = 2 * math.pi * 1e3


def doppler_blockade():
    return blockade_scenario(doppler_shifts=(200 * KHZ, -100 * KHZ), doppler=DopplerSpec(temperature=46e-6))


def test_blockade_gate_scores_high() -> None:
    result = run_scenario(blockade_scenario(), IntegratorConfig(n_samples=21))
    report = result.report
    assert report.fidelities["F"] >= 0.99
    assert report.errors["E_in"] == pytest.approx(1.0 - report.fidelities["F"])
    assert abs(report.phases["01"][-1]) == pytest.approx(math.pi, abs=1e-2)
    assert result.trajectory.metadata["scenario_hash"]
    assert result.plateau is None


def test_gate_fidelity_matches_full_run() -> None:
    scenario = blockade_scenario()
    full = run_scenario(scenario).report.fidelities["F"]
    assert gate_fidelity(scenario) == pytest.approx(full, abs=1e-8)


def test_strip_noise() -> None:
    scenario = doppler_blockade()
    assert active_sources(scenario) == ["doppler"]
    clean = strip_noise(scenario)
    assert active_sources(clean) == []
    assert clean.noise.doppler is None
    assert all(d.doppler_shift == 0.0 for d in clean.drives)
    assert active_sources(strip_noise(scenario, keep=("doppler",))) == ["doppler"]
    with pytest.raises(ValueError):
        strip_noise(scenario, keep=("wind",))


def test_error_report_isolates_doppler() -> None:
    report = error_report(doppler_blockade())
    assert report.errors["E_de"] == 0.0
    assert report.errors["E_dd"] == 0.0
    assert report.errors["E_do"] >= 0.0
    assert report.errors["E_do"] == pytest.approx(
        max(0.0, report.fidelities["F"] - report.fidelities["F_doppler"]), abs=1e-15
    )
    assert "F_decay" not in report.fidelities


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def test_simulate_keeps_noise_out_of_intrinsic_error() -> None:
    result = simulate_scenario(blockade_scenario(doppler_shifts=(3e6, -3e6)))
    errors = result.report.errors
    noiseless = gate_fidelity(blockade_scenario())
    assert set(errors) >= {"E_in", "E_de", "E_dd", "E_do"}
    assert errors["E_in"] == pytest.approx(1.0 - noiseless, abs=1e-9)
    assert errors["E_in"] < 1e-3
    assert errors["E_do"] > 1e-2
    assert errors["E_de"] == 0.0 and errors["E_dd"] == 0.0
    assert result.report.fidelities["F"] == pytest.approx(1.0 - errors["E_in"] - errors["E_do"], abs=1e-8)


def test_simulate_noiseless_budget_is_intrinsic_only() -> None:
    errors = simulate_scenario(blockade_scenario()).report.errors
    assert errors["E_in"] == pytest.approx(1.0 - gate_fidelity(blockade_scenario()), abs=1e-9)
    assert errors["E_de"] == errors["E_dd"] == errors["E_do"] == 0.0


def test_sample_noise_draws_doppler_shifts_from_the_seed() -> None:
    doppler = DopplerSpec(temperature=46e-6)
    scenario = blockade_scenario(doppler=doppler, seed=5)
    assert active_sources(scenario) == []
    sampled = sample_noise(scenario)
    expected = philox(5).normal(0.0, doppler.sigma_delta, size=2)
    assert [d.doppler_shift for d in sampled.drives] == pytest.approx([expected[d.atom] for d in scenario.drives])
    assert active_sources(sampled) == ["doppler"]
    again = sample_noise(scenario)
    assert [d.doppler_shift for d in again.drives] == [d.doppler_shift for d in sampled.drives]
    other = sample_noise(blockade_scenario(doppler=doppler, seed=6))
    assert [d.doppler_shift for d in other.drives] != [d.doppler_shift for d in sampled.drives]


def test_sample_noise_keeps_realized_draws() -> None:
    scenario = doppler_blockade()
    assert sample_noise(scenario).drives == scenario.drives
    quiet = blockade_scenario()
    assert sample_noise(quiet) is quiet


def test_sample_noise_draws_the_pair_distance() -> None:
    p = parameter_set("n70")
    geometry = InteractionSpec.from_geometry(p.c6, positions_1d((0.0, p.distance)))
    scenario = two_qubit_scenario(Scheme.STRONG, p).with_changes(
        interactions=geometry, noise=NoiseSpec(ddf_sigma=0.05), rng_seed=11
    )
    ddf = sample_noise(scenario).interactions.ddf
    assert ddf is not None
    assert ddf.d_ideal == pytest.approx(p.distance)
    assert ddf.d_actual == pytest.approx(sample_distance(philox(11), p.distance, 0.05))

    explicit = two_qubit_scenario(Scheme.STRONG, p).with_changes(noise=NoiseSpec(ddf_sigma=0.05))
    with pytest.raises(ConfigError) as info:
        sample_noise(explicit)
    assert info.value.field == "noise.ddf"
