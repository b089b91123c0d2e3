import json
import os
from pathlib import Path

import pandas as pd
import pytest

from rydsim.cli import EXIT_OK, main

pytestmark = pytest.mark.slow


def test_simulate_fig2_summary(tmp_path: Path) -> None:
    assert main(["--quiet", "simulate", "--preset", "fig2", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "fig2_summary.json").read_text())
    assert summary["F"] >= 1 - 1e-5
    assert summary["integrator"]["norm_drift"] < 1e-8


def test_simulate_fig4_plateau(tmp_path: Path) -> None:
    assert main(["--quiet", "simulate", "--preset", "fig4", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "fig4_summary.json").read_text())
    assert summary["plateau"]["min_fidelity"] >= 0.99


def test_campaign_fig5_writes_every_panel(tmp_path: Path) -> None:
    jobs = str(min(4, os.cpu_count() or 1))
    assert main(["--quiet", "campaign", "--preset", "fig5", "--out", str(tmp_path), "--jobs", jobs]) == EXIT_OK
    tables = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert tables == sorted(f"{param}-s{s}.csv" for param in ("T", "omega_2", "V") for s in (1, 2, 3))
    frame = pd.read_csv(tmp_path / "V-s2.csv")
    assert len(frame) == 9
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["runs"]) == {name[:-4] for name in tables}
