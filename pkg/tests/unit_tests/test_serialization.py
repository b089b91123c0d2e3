import json
import math
from pathlib import Path

import numpy as np
import pytest

from rydsim.errors import ConfigError
from rydsim.presets import PRESETS, PresetKind, get_preset
from rydsim.serialization import (
    MHZ,
    US,
    integrator_from_dict,
    integrator_to_dict,
    load_document,
    scenario_from_dict,
    scenario_hash,
    scenario_to_dict,
    simulation_from_dict,
    simulation_to_dict,
)
from rydsim.system import assemble_hamiltonian

SIMULATE_PRESETS = [name for name, p in PRESETS.items() if p.kind is PresetKind.SIMULATE]


def fig2_document() -> dict:
    ((_, text),) = get_preset("fig2").documents
    return json.loads(text)


@pytest.mark.parametrize("name", SIMULATE_PRESETS)
def test_preset_scenarios_survive_a_dump_and_reload(name: str) -> None:
    ((_, config),) = get_preset(name).simulations()
    scenario = config.scenario
    reloaded = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(scenario))))
    h, h2 = assemble_hamiltonian(scenario), assemble_hamiltonian(reloaded)
    for t in np.linspace(0.0, scenario.t_final, 7):
        np.testing.assert_allclose(h2(t), h(t), rtol=1e-12, atol=1e-12 * max(1.0, np.abs(h(t)).max()))
    np.testing.assert_allclose(reloaded.initial_state.amplitudes, scenario.initial_state.amplitudes, atol=1e-15)
    assert reloaded.t_final == pytest.approx(scenario.t_final, rel=1e-12)
    assert reloaded.target == scenario.target


def test_config_units_are_converted() -> None:
    doc = fig2_document()
    doc["drives"][1]["rabi"] = 1.0
    doc["t_final"] = 2.5
    scenario = scenario_from_dict(doc)
    assert scenario.drives[1].rabi == pytest.approx(2 * math.pi * 1e6)
    assert scenario.t_final == pytest.approx(2.5e-6)


def test_hash_tracks_content() -> None:
    doc = fig2_document()
    a = scenario_from_dict(doc)
    assert scenario_hash(a) == scenario_hash(scenario_from_dict(doc))
    doc["seed"] = 99
    assert scenario_hash(scenario_from_dict(doc)) != scenario_hash(a)


def test_unknown_drive_key_is_reported_with_path_and_line(tmp_path: Path) -> None:
    doc = fig2_document()
    doc["drives"][0]["bogus"] = 1
    text = json.dumps(doc, indent=2)
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ConfigError) as info:
        load_document(path, simulation_from_dict)
    assert info.value.field == "drives.0.bogus"
    expected_line = next(k for k, line in enumerate(text.splitlines(), start=1) if '"bogus"' in line)
    assert info.value.line == expected_line
    assert str(info.value).startswith(f"line {expected_line}, field 'drives.0.bogus'")


def test_invalid_json_reports_line(tmp_path: Path) -> None:
    path = tmp_path / "broken.json"
    path.write_text('{\n  "name": "x",\n  oops\n}\n')
    with pytest.raises(ConfigError) as info:
        load_document(path, scenario_from_dict)
    assert info.value.line == 3


def test_missing_file_is_a_config_error(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_document(tmp_path / "absent.json", scenario_from_dict)


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("t_final"), "t_final"),
        (lambda d: d.update(seed=True), "seed"),
        (lambda d: d["drives"][0].update(rabi="fast"), "drives.0.rabi"),
        (lambda d: d["drives"][0].update(kind="chirped"), "drives.0"),
        (lambda d: d["atoms"][0].update(levels=["g0", "ryd"]), "atoms.0"),
        (lambda d: d["interactions"].update(c6_geometry={"c6": 1.0, "positions": [[0.0], [1.0]]}), "interactions"),
        (lambda d: d["initial_state"]["amplitudes"].update(xx=1.0), "initial_state.amplitudes.xx"),
        (lambda d: d["target"].update(n_qubits=3), "target"),
    ],
)
def test_invalid_documents(mutate, field: str) -> None:
    doc = fig2_document()
    mutate(doc)
    with pytest.raises(ConfigError) as info:
        simulation_from_dict(doc)
    assert info.value.field == field


def test_integrator_units() -> None:
    cfg = integrator_from_dict({"max_step": 0.01, "sample_times": [0.0, 1.0], "blockade_cutoff": 100.0})
    assert cfg.max_step == pytest.approx(0.01 * US)
    assert cfg.sample_times == pytest.approx((0.0, US))
    assert cfg.blockade_cutoff == pytest.approx(100.0 * MHZ)
    assert integrator_to_dict(cfg)["blockade_cutoff"] == pytest.approx(100.0)
    with pytest.raises(ConfigError) as info:
        integrator_from_dict({"rel_tol": -1.0})
    assert info.value.field == "integrator.rel_tol"
    with pytest.raises(ConfigError) as info:
        integrator_from_dict({"order": 4})
    assert info.value.field == "integrator.order"


def test_simulation_plateau_window_in_seconds() -> None:
    ((_, config),) = get_preset("fig4").simulations()
    assert config.plateau is not None
    doc = simulation_to_dict(config)
    start, stop = doc["plateau"]["window"]
    assert config.plateau == pytest.approx((start * US, stop * US))
    assert stop > start
