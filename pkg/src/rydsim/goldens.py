"""Regression checks of the fast presets against stored summaries.

A goldens directory holds ``tolerances.json`` mapping preset name to
per-metric absolute tolerances, and one ``<preset>.json`` per preset with
the metrics recorded by ``--update``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from rydsim.errors import ConfigError, GoldenMismatchError
from rydsim.outputs import golden_metrics, jsonable, simulation_summary
from rydsim.presets import PresetKind, fast_presets, get_preset
from rydsim.runner import simulate_scenario
from rydsim.utils import code_version

logger = logging.getLogger(__name__)

TOLERANCES_NAME = "tolerances.json"

DEFAULT_TOLERANCES = {
    "F": 1e-6,
    "E_in": 1e-6,
    "phase": 1e-4,
    "plateau_min_fidelity": 1e-5,
    "plateau_mean_fidelity": 1e-5,
}


def _default_tolerance(metric: str) -> float:
    if metric.startswith("phase_"):
        return DEFAULT_TOLERANCES["phase"]
    return DEFAULT_TOLERANCES[metric]


@dataclass
class CheckOutcome:
    """Metrics of one preset rerun and the metrics that left their tolerance."""

    preset: str
    metrics: dict[str, float]
    diffs: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.diffs


def preset_metrics(name: str) -> dict[str, float]:
    """Rerun a simulate preset and flatten its comparable metrics."""
    preset = get_preset(name)
    if preset.kind is not PresetKind.SIMULATE:
        raise ConfigError(f"{name} is a campaign preset; goldens cover simulate presets", field=name)
    ((_, config),) = preset.simulations()
    result = simulate_scenario(config.scenario, config.integrator, plateau=config.plateau, plateau_label=config.plateau_label)
    return golden_metrics(simulation_summary(result))


def load_tolerances(goldens: Path) -> dict[str, dict[str, float]]:
    """Read tolerances.json; a missing or malformed file is a ConfigError."""
    path = goldens / TOLERANCES_NAME
    if not path.is_file():
        raise ConfigError(f"tolerance file {path} not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("tolerances must map preset names to metric tolerances")
    tolerances: dict[str, dict[str, float]] = {}
    for preset, metrics in doc.items():
        if not isinstance(metrics, dict) or not metrics:
            raise ConfigError("expected a non-empty object of metric tolerances", field=preset)
        for metric, tol in metrics.items():
            if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
                raise ConfigError(f"tolerance must be a positive number, got {tol!r}", field=f"{preset}.{metric}")
        tolerances[preset] = {m: float(t) for m, t in metrics.items()}
    return tolerances


def compare(metrics: dict[str, float], golden: dict[str, Any], tolerances: dict[str, float]) -> dict[str, tuple[float, float, float]]:
    """Get (got, golden, tol) for every metric outside its tolerance."""
    diffs = {}
    for metric, tol in tolerances.items():
        got = metrics.get(metric, math.nan)
        want = golden.get(metric)
        want = math.nan if want is None else float(want)
        delta = got - want
        if metric.startswith("phase_"):
            delta = math.remainder(delta, 2 * math.pi)
        if not abs(delta) <= tol:
            diffs[metric] = (got, want, tol)
    return diffs


def check_goldens(goldens: Path, names: Optional[Iterable[str]] = None) -> list[CheckOutcome]:
    """Rerun presets and compare their metrics with the stored ones.

    Args:
        goldens: Directory with ``tolerances.json`` and per-preset files.
        names: Restrict to these presets; defaults to every preset with tolerances.

    Returns:
        One outcome per preset, in tolerance-file order.
    """
    tolerances = load_tolerances(goldens)
    selected = list(names) if names is not None else list(tolerances)
    outcomes = []
    for name in selected:
        if name not in tolerances:
            raise ConfigError("no tolerances declared", field=name)
        golden_path = goldens / f"{name}.json"
        if not golden_path.is_file():
            raise ConfigError(f"golden file {golden_path} not found; run `rydsim check --update`", field=name)
        golden = json.loads(golden_path.read_text())
        metrics = preset_metrics(name)
        diffs = compare(metrics, golden.get("metrics", {}), tolerances[name])
        logger.info("%s: %s", name, "ok" if not diffs else f"{len(diffs)} metric(s) off")
        outcomes.append(CheckOutcome(preset=name, metrics=metrics, diffs=diffs))
    return outcomes


def raise_for_regressions(outcomes: Iterable[CheckOutcome]) -> None:
    """Raise GoldenMismatchError for the first failing preset."""
    for outcome in outcomes:
        if not outcome.passed:
            raise GoldenMismatchError(outcome.preset, outcome.diffs)


def update_goldens(goldens: Path, names: Optional[Iterable[str]] = None) -> list[CheckOutcome]:
    """Regenerate golden metrics; tolerances.json gains defaults for new presets."""
    goldens.mkdir(parents=True, exist_ok=True)
    selected = list(names) if names is not None else [p.name for p in fast_presets()]
    path = goldens / TOLERANCES_NAME
    tolerances = load_tolerances(goldens) if path.is_file() else {}
    outcomes = []
    for name in selected:
        metrics = preset_metrics(name)
        (goldens / f"{name}.json").write_text(
            json.dumps(jsonable({"preset": name, "code_version": code_version(), "metrics": metrics}), indent=2, sort_keys=True)
            + "\n"
        )
        tolerances.setdefault(name, {m: _default_tolerance(m) for m in metrics})
        outcomes.append(CheckOutcome(preset=name, metrics=metrics))
    path.write_text(json.dumps(tolerances, indent=2) + "\n")
    return outcomes
