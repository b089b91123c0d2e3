import json
import subprocess
import sys
from pathlib import Path

import pandas as pd
import pytest

from rydsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_REGRESSION, build_parser, load_simulations, main
from rydsim.presets import get_preset


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("RYDSIM_SEED", raising=False)


def test_list_presets(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["list-presets"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("fig2", "fig4", "blockade", "fig9a", "fig12"):
        assert name in out


def test_module_entry_point() -> None:
    done = subprocess.run([sys.executable, "-m", "rydsim", "--help"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "simulate" in done.stdout


def test_simulate_preset_writes_tables(tmp_path: Path) -> None:
    out = tmp_path / "out"
    assert main(["--quiet", "simulate", "--preset", "blockade", "--out", str(out), "--emit-plot-script"]) == EXIT_OK
    trajectory = pd.read_csv(out / "blockade_trajectory.csv")
    assert list(trajectory.columns) == ["t", *(f"pop_{a}{b}" for a in "01r" for b in "01r")]
    report = pd.read_csv(out / "blockade_report.csv")
    assert list(report.columns[:2]) == ["t", "F"]
    assert "phase_01" in report.columns
    summary = json.loads((out / "blockade_summary.json").read_text())
    assert summary["F"] >= 0.99
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert "blockade_summary.json" in manifest["outputs"]
    assert (out / "plot.py").is_file()


def test_malformed_config_exits_2_without_outputs(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    ((_, text),) = get_preset("blockade").documents
    doc = json.loads(text)
    doc["drives"][0]["bogus"] = 1
    config = tmp_path / "bad.json"
    config.write_text(json.dumps(doc, indent=2))
    out = tmp_path / "out"
    assert main(["simulate", str(config), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert "drives.0.bogus" in capsys.readouterr().err


def test_wrong_preset_kind_exits_2() -> None:
    assert main(["simulate", "--preset", "fig5"]) == EXIT_CONFIG
    assert main(["campaign", "--preset", "fig2"]) == EXIT_CONFIG
    assert main(["simulate", "--preset", "nope"]) == EXIT_CONFIG
    assert main(["simulate"]) == EXIT_CONFIG


def test_campaign_config(tmp_path: Path) -> None:
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({"kind": "blockade_doppler", "grid": [0.0], "trials_per_point": 1}))
    out = tmp_path / "out"
    assert main(["--quiet", "campaign", str(config), "--out", str(out)]) == EXIT_OK
    table = pd.read_csv(out / "sweep.csv")
    assert list(table.columns) == ["grid_value", "mean_error", "std_error", "n_trials"]
    assert table["n_trials"].tolist() == [1]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["runs"]["sweep"]["base_seed"] == 0


def test_seed_precedence(monkeypatch: pytest.MonkeyPatch) -> None:
    parser = build_parser()
    args = parser.parse_args(["simulate", "--preset", "blockade"])
    ((_, config),) = load_simulations(args)
    assert config.scenario.rng_seed == 0
    monkeypatch.setenv("RYDSIM_SEED", "42")
    ((_, config),) = load_simulations(args)
    assert config.scenario.rng_seed == 42
    args = parser.parse_args(["simulate", "--preset", "blockade", "--seed", "7", "--tol", "1e-8"])
    ((_, config),) = load_simulations(args)
    assert config.scenario.rng_seed == 7
    assert config.integrator.rel_tol == 1e-8


def test_check_missing_tolerances_exits_2(tmp_path: Path) -> None:
    assert main(["check", "--goldens", str(tmp_path / "goldens")]) == EXIT_CONFIG


def test_check_detects_a_perturbed_golden(tmp_path: Path) -> None:
    goldens = tmp_path / "goldens"
    assert main(["--quiet", "check", "--goldens", str(goldens), "--update", "--preset", "blockade"]) == EXIT_OK
    tolerances = json.loads((goldens / "tolerances.json").read_text())
    assert tolerances["blockade"]["F"] == 1e-6
    assert main(["--quiet", "check", "--goldens", str(goldens)]) == EXIT_OK

    path = goldens / "blockade.json"
    golden = json.loads(path.read_text())
    golden["metrics"]["F"] -= 1e-3
    path.write_text(json.dumps(golden))
    assert main(["--quiet", "check", "--goldens", str(goldens)]) == EXIT_REGRESSION


def test_malformed_tolerances_exit_2(tmp_path: Path) -> None:
    goldens = tmp_path / "goldens"
    goldens.mkdir()
    (goldens / "tolerances.json").write_text(json.dumps({"blockade": {"F": -1}}))
    assert main(["check", "--goldens", str(goldens)]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "sweep, field",
    [
        ({"kind": "superatom", "grid": [0.0]}, "grid"),
        ({"kind": "superatom", "grid": [12.0]}, "grid"),
        ({"kind": "ddf", "param_set": "ratio", "grid": [0.01], "trials_per_point": 2}, "param_set"),
    ],
)
def test_campaign_with_bad_geometry_exits_2(
    tmp_path: Path, capsys: pytest.CaptureFixture[str], sweep: dict, field: str
) -> None:
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps(sweep))
    out = tmp_path / "out"
    assert main(["campaign", str(config), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert field in capsys.readouterr().err


def blockade_config(tmp_path: Path, noise: dict) -> Path:
    ((_, text),) = get_preset("blockade").documents
    doc = json.loads(text)
    doc["noise"] = noise
    config = tmp_path / "noisy.json"
    config.write_text(json.dumps(doc))
    return config


def test_simulate_samples_configured_doppler_noise(tmp_path: Path) -> None:
    config = blockade_config(tmp_path, {"doppler": {"temperature": 46.0}})
    summaries = {}
    for run, seed in (("a", "3"), ("b", "3"), ("c", "4")):
        out = tmp_path / run
        assert main(["--quiet", "simulate", str(config), "--out", str(out), "--seed", seed]) == EXIT_OK
        summaries[run] = json.loads((out / "noisy_summary.json").read_text())
    summary = summaries["a"]
    for key in ("E_in", "E_de", "E_dd", "E_do"):
        assert key in summary and key in summary["errors"]
    assert summary["E_do"] >= 0.0
    assert summary["E_in"] < 1e-3
    assert summaries["b"]["F"] == summary["F"]
    assert summaries["c"]["F"] != summary["F"]


def test_simulate_rejects_distance_noise_without_geometry(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = blockade_config(tmp_path, {"ddf": {"sigma": 0.05}})
    assert main(["simulate", str(config), "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    assert "noise.ddf" in capsys.readouterr().err
