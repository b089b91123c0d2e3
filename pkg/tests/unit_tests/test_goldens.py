import json
import math
from pathlib import Path

import pytest

from rydsim.errors import ConfigError, GoldenMismatchError
from rydsim.goldens import CheckOutcome, compare, load_tolerances, raise_for_regressions
from rydsim.outputs import golden_metrics, jsonable


def test_compare_flags_metrics_outside_tolerance() -> None:
    diffs = compare({"F": 0.99, "E_in": 0.01}, {"F": 0.999, "E_in": 0.01}, {"F": 1e-6, "E_in": 1e-6})
    assert list(diffs) == ["F"]
    got, want, tol = diffs["F"]
    assert (got, want, tol) == (0.99, 0.999, 1e-6)


def test_phase_comparison_wraps() -> None:
    near_pi = {"phase_01": math.pi - 1e-6}
    golden = {"phase_01": -math.pi + 1e-6}
    assert compare(near_pi, golden, {"phase_01": 1e-4}) == {}


def test_missing_metric_fails() -> None:
    assert "F" in compare({}, {"F": 1.0}, {"F": 1.0})
    assert "F" in compare({"F": 1.0}, {"F": None}, {"F": 1.0})


def test_raise_for_regressions() -> None:
    raise_for_regressions([CheckOutcome("fig2", {"F": 1.0})])
    with pytest.raises(GoldenMismatchError) as info:
        raise_for_regressions([CheckOutcome("fig3", {"F": 0.9}, {"F": (0.9, 1.0, 1e-6)})])
    assert info.value.preset == "fig3"
    assert "fig3" in str(info.value)


@pytest.mark.parametrize(
    "content",
    ["{not json", "[1, 2]", json.dumps({"fig2": {}}), json.dumps({"fig2": {"F": "small"}}), json.dumps({"fig2": {"F": True}})],
)
def test_malformed_tolerances(tmp_path: Path, content: str) -> None:
    (tmp_path / "tolerances.json").write_text(content)
    with pytest.raises(ConfigError):
        load_tolerances(tmp_path)


def test_golden_metrics_skip_undefined_phases() -> None:
    summary = {
        "F": 0.999,
        "E_in": 0.001,
        "phases": {"00": 0.0, "01": math.pi, "11": None},
        "plateau": {"min_fidelity": 0.99, "mean_fidelity": 0.995},
    }
    metrics = golden_metrics(summary)
    assert set(metrics) == {"F", "E_in", "phase_00", "phase_01", "plateau_min_fidelity", "plateau_mean_fidelity"}


def test_jsonable() -> None:
    assert jsonable({"a": (1.0, math.nan), 2: [math.inf]}) == {"a": [1.0, None], "2": [None]}
