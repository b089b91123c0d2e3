import math
import os

import numpy as np
import pytest

from rydsim.campaigns import (
    blockade_baseline_doppler,
    ddf_monte_carlo,
    decay_error_scan,
    doppler_monte_carlo,
    intrinsic_error_scan,
    multiqubit_fidelity,
    superatom_radius_scan,
    sweep_relative_error,
)
from rydsim.presets import get_preset
from rydsim.runner import RunResult, run_scenario
from rydsim.schemes import parameter_set

pytestmark = pytest.mark.slow

JOBS = min(4, os.cpu_count() or 1)


def run_preset(name: str) -> RunResult:
    ((_, config),) = get_preset(name).simulations()
    return run_scenario(config.scenario, config.integrator, plateau=config.plateau, plateau_label=config.plateau_label)


def test_raman_scheme_reaches_unit_fidelity() -> None:
    report = run_preset("fig2").report
    assert report.fidelities["F"] >= 1 - 1e-4
    assert abs(report.phases["01"][-1]) == pytest.approx(math.pi, abs=1e-2)
    for label in ("00", "10", "11"):
        assert report.phases[label][-1] == pytest.approx(0.0, abs=1e-2)


def test_strong_drive_freezes_the_doubly_excited_input() -> None:
    result = run_preset("fig3")
    assert result.report.fidelities["F"] >= 1 - 1e-4
    pop_11 = result.report.populations["11"] / result.report.populations["11"][0]
    assert pop_11.min() >= 0.99


def test_lzs_plateau() -> None:
    result = run_preset("fig4")
    assert result.plateau is not None
    assert result.plateau.min_fidelity >= 0.99
    assert result.plateau.max_phase_deviation < 0.1 * math.pi


def test_relative_errors_hurt_the_raman_scheme_most() -> None:
    grid = [-0.1, 0.0, 0.1]
    errors = {s: sweep_relative_error("V", grid, s, progress=False).means() for s in (1, 2, 3)}
    for scheme in (2, 3):
        assert np.all(errors[scheme] <= 0.01)
    assert errors[1][1] <= 1e-4 and errors[2][1] <= 1e-4
    assert np.max(errors[1][[0, 2]]) >= 10 * np.max(errors[2][[0, 2]])


def test_intrinsic_errors_by_scheme() -> None:
    e1, e2, e3 = intrinsic_error_scan(progress=False).means()
    assert e1 <= 1e-5 and e2 <= 1e-5
    assert 1e-4 <= e3 <= 1e-2


def test_decay_error_falls_with_lifetime() -> None:
    result = decay_error_scan([100.0, 1000.0, 10000.0], 2, progress=False)
    means = result.means()
    assert np.all(np.diff(means) < 0)
    assert means[-1] < means[0] / 10


def test_decay_error_ordering_at_fixed_lifetime() -> None:
    e1, e2, e3 = (decay_error_scan([1000.0], scheme, progress=False).means()[0] for scheme in (1, 2, 3))
    assert e2 < e1 < e3


def test_distance_fluctuations() -> None:
    weak = ddf_monte_carlo([0.0, 0.01], 1, trials=201, base_seed=8, jobs=JOBS, progress=False)
    assert weak.points[0].mean_error == 0.0
    assert weak.points[1].mean_error + 3 * weak.points[1].std_error >= 0.1
    strong = ddf_monte_carlo([0.14], 2, trials=201, base_seed=8, jobs=JOBS, progress=False)
    assert strong.points[0].mean_error - 3 * strong.points[0].std_error < 1e-2
    weak_100 = ddf_monte_carlo([0.01], 1, n_state=100, trials=201, base_seed=8, jobs=JOBS, progress=False)
    assert weak_100.points[0].mean_error < weak.points[1].mean_error


def test_doppler_errors_stay_below_the_blockade_baseline() -> None:
    strong = doppler_monte_carlo([46.0], 2, "fast-1mhz", trials=201, base_seed=9, jobs=JOBS, progress=False)
    assert strong.points[0].mean_error - 3 * strong.points[0].std_error < 1e-2

    temps = [0.0, 50.0]
    s1 = doppler_monte_carlo(temps, 1, "fast-5mhz", trials=201, base_seed=9, jobs=JOBS, progress=False)
    s2 = doppler_monte_carlo(temps, 2, "fast-5mhz", trials=201, base_seed=9, jobs=JOBS, progress=False)
    baseline = blockade_baseline_doppler(temps, trials=201, base_seed=9, jobs=JOBS, progress=False)
    assert s1.points[1].mean_error - 3 * s1.points[1].std_error <= 1e-3
    assert s2.points[1].mean_error - 3 * s2.points[1].std_error <= 0.7e-3
    assert np.all(s2.means() < baseline.means())
    assert baseline.points[0].mean_error == pytest.approx(1 - baseline.provenance["reference_fidelity"])


@pytest.mark.parametrize("n", [3, 4])
def test_multiqubit_phase_gates(n: int) -> None:
    report = multiqubit_fidelity(n, 2)
    omega_2 = parameter_set("ratio").omega_2
    assert report.fidelity_at(2 * math.pi / omega_2) >= 0.99


def test_lzs_multiqubit_plateau() -> None:
    result = run_preset("fig10-lzs")
    assert result.plateau is not None and result.plateau.min_fidelity >= 0.99


def test_lzs_four_qubit_plateau() -> None:
    result = run_preset("fig11-lzs")
    assert result.plateau is not None
    assert result.plateau.min_fidelity >= 0.99


def test_superatom_fidelity_falls_with_radius() -> None:
    radii = [0.005, 0.01, 0.02, 0.03, 0.04]
    fidelities = superatom_radius_scan(radii, progress=False).fidelities()
    assert np.all(np.diff(fidelities) <= 1e-3)
    assert fidelities[1] >= 0.99
    assert fidelities[3] < 0.99

