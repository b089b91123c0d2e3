import math

import pytest

from rydsim.campaigns import CampaignKind
from rydsim.presets import PRESETS, PresetKind, describe, fast_presets, get_preset
from rydsim.schemes import parameter_set


def test_every_preset_parses() -> None:
    for preset in PRESETS.values():
        parsed = preset.simulations() if preset.kind is PresetKind.SIMULATE else preset.sweeps()
        assert [label for label, _ in parsed] == preset.labels


def test_fast_presets() -> None:
    assert [p.name for p in fast_presets()] == ["fig2", "fig3", "fig4", "blockade"]


def test_lookup() -> None:
    with pytest.raises(ValueError):
        get_preset("fig99")
    with pytest.raises(ValueError):
        get_preset("fig5").simulations()
    with pytest.raises(ValueError):
        get_preset("fig2").sweeps()


def test_relative_error_sweeps_cover_all_parameters_and_schemes() -> None:
    sweeps = dict(get_preset("fig5").sweeps())
    assert len(sweeps) == 9
    spec = sweeps["V-s3"]
    assert spec.kind is CampaignKind.RELATIVE_ERROR
    assert spec.scheme == 3 and spec.parameter == "V"
    assert spec.grid[0] == pytest.approx(-0.1) and spec.grid[-1] == pytest.approx(0.1)
    assert 0.0 in spec.grid


def test_lzs_preset_has_plateau_after_the_gate() -> None:
    ((_, config),) = get_preset("fig4").simulations()
    omega_2 = parameter_set("ratio").omega_2
    period = 2 * math.pi / omega_2
    assert config.plateau == pytest.approx((3.5 * period, 4.5 * period))
    assert config.scenario.t_final == pytest.approx(5 * period)
    assert config.scenario.evaluation_time < config.scenario.t_final


def test_monte_carlo_presets_use_default_trials() -> None:
    for label, spec in get_preset("fig9a").sweeps():
        assert spec.trials == 201, label
        assert spec.base_seed == 9
    assert "blockade" in describe(get_preset("fig9b"))
