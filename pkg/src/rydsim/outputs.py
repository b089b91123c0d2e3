"""CSV/JSON artifacts of simulate and campaign runs.

File layout inside an output directory, per run label:

- ``<label>_trajectory.csv``: t, pop_<basis label> for every basis state
- ``<label>_report.csv``: t, F, pop_<bits>..., phase_<bits>...
- ``<label>_summary.json``: fidelity at the gate time, error scalars,
  phases, plateau metrics and integrator diagnostics
- ``<label>.csv`` (campaigns): grid_value, mean_error, std_error, n_trials
- ``manifest.json``: everything needed to rerun

Times are in seconds, phases in radians.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from rydsim.campaigns import CampaignResult
from rydsim.configuration import IntegratorConfig
from rydsim.operators import computational_labels
from rydsim.runner import RunResult
from rydsim.serialization import integrator_to_dict
from rydsim.utils import code_version

ERROR_KEYS = ("E_in", "E_de", "E_dd", "E_do")

TRAJECTORY_SUFFIX = "_trajectory.csv"
REPORT_SUFFIX = "_report.csv"
SUMMARY_SUFFIX = "_summary.json"
MANIFEST_NAME = "manifest.json"
PLOT_SCRIPT_NAME = "plot.py"


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, tuples and non-finite floats into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def _write_json(path: Path, document: Any) -> Path:
    path.write_text(json.dumps(jsonable(document), indent=2, sort_keys=True) + "\n")
    return path


def simulation_summary(result: RunResult) -> dict[str, Any]:
    """Collect the scalars of a simulate run; NaN phases become null."""
    report = result.report
    scenario = result.scenario
    t_eval = scenario.evaluation_time
    i = int(np.argmin(np.abs(report.times - t_eval)))
    labels = computational_labels(report.target.n_qubits)
    summary: dict[str, Any] = {
        "name": scenario.name,
        "scenario_hash": result.trajectory.metadata.get("scenario_hash"),
        "evaluation_time": t_eval,
        "F": report.fidelities["F"],
        **{key: report.errors.get(key, math.nan) for key in ERROR_KEYS},
        "final_fidelity": report.final_fidelity,
        "phases": {b: report.phases[b][i] for b in labels},
        "populations": {b: report.populations[b][i] for b in labels},
        "errors": dict(report.errors),
        "integrator": {
            k: v for k, v in result.trajectory.metadata.items() if k != "scenario_hash"
        },
    }
    if result.plateau is not None:
        summary["plateau"] = asdict(result.plateau)
    return summary


def golden_metrics(summary: dict[str, Any]) -> dict[str, float]:
    """Flatten the numeric scalars a regression check can compare."""
    metrics: dict[str, float] = {"F": summary["F"], "E_in": summary["E_in"]}
    for label, phase in summary["phases"].items():
        if phase is not None and math.isfinite(phase):
            metrics[f"phase_{label}"] = phase
    for key in ("min_fidelity", "mean_fidelity"):
        if "plateau" in summary:
            metrics[f"plateau_{key}"] = summary["plateau"][key]
    return {k: float(v) for k, v in metrics.items()}


def write_simulation(out_dir: Path, label: str, result: RunResult) -> list[Path]:
    """Write the trajectory CSV, gate-report CSV and summary JSON of one run."""
    out_dir.mkdir(parents=True, exist_ok=True)
    trajectory = out_dir / f"{label}{TRAJECTORY_SUFFIX}"
    result.trajectory.to_frame().to_csv(trajectory, index=False)
    report = out_dir / f"{label}{REPORT_SUFFIX}"
    result.report.to_frame().to_csv(report, index=False)
    summary = _write_json(out_dir / f"{label}{SUMMARY_SUFFIX}", simulation_summary(result))
    return [trajectory, report, summary]


def write_campaign(out_dir: Path, label: str, result: CampaignResult) -> Path:
    """Write a campaign table."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{label}.csv"
    result.to_frame().to_csv(path, index=False)
    return path


@dataclass
class RunManifest:
    """Provenance of one CLI invocation, sufficient to rerun it exactly."""

    command: str
    source: str
    seed: int
    integrator: dict[str, Any]
    runs: dict[str, Any] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    wall_clock_s: float = 0.0
    code_version: str = field(default_factory=code_version)
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    @classmethod
    def start(cls, command: str, source: str, seed: int, integrator: Optional[IntegratorConfig] = None) -> RunManifest:
        return cls(
            command=command,
            source=source,
            seed=seed,
            integrator=integrator_to_dict(integrator) if integrator is not None else {},
        )

    def add_outputs(self, paths: Sequence[Path]) -> None:
        self.outputs.extend(str(p.name) for p in paths)

    def finish(self, out_dir: Path) -> Path:
        """Stamp the wall-clock time and write ``manifest.json``."""
        self.wall_clock_s = time.perf_counter() - self._t0
        document = {k: v for k, v in asdict(self).items() if not k.startswith("_")}
        return _write_json(out_dir / MANIFEST_NAME, document)


_PLOT_TEMPLATE = '''"""Plot the tables written by rydsim. Requires matplotlib (pip install rydsim[plot])."""

from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

HERE = Path(__file__).resolve().parent
TABLES = {tables!r}


def main() -> None:
    for name in TABLES:
        frame = pd.read_csv(HERE / name)
        x = frame.columns[0]
        fig, ax = plt.subplots()
        if "mean_error" in frame:
            ax.errorbar(frame[x], frame["mean_error"], yerr=frame["std_error"], marker="o")
            ax.set_ylabel("error")
        else:
            ys = [c for c in frame.columns if c == "F" or c.startswith("pop_")]
            for y in ys:
                ax.plot(frame[x], frame[y], label=y)
            ax.legend(fontsize="small")
        ax.set_xlabel(x)
        ax.set_title(name)
        fig.savefig(HERE / (Path(name).stem + ".png"), dpi=150)
        plt.close(fig)


if __name__ == "__main__":
    main()
'''


def emit_plot_script(out_dir: Path, tables: Sequence[Path]) -> Path:
    """Write a standalone matplotlib script plotting the given CSVs."""
    names = [p.name for p in tables if p.suffix == ".csv" and not p.name.endswith(TRAJECTORY_SUFFIX)]
    path = out_dir / PLOT_SCRIPT_NAME
    path.write_text(_PLOT_TEMPLATE.format(tables=names))
    return path
