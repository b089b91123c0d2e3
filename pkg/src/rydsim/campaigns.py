"""Parameter sweeps and Monte Carlo ensembles over gate scenarios.

Every trial draws from its own counter-based substream seeded by
(base_seed, grid index, trial index), and results are reduced in index
order, so a campaign is bit-for-bit identical for any worker count.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd
from tqdm.auto import tqdm
from tqdm.contrib.concurrent import process_map

from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError
from rydsim.gates import GateReport, isolated_error
from rydsim.runner import gate_fidelity, run_scenario
from rydsim.schemes import (
    US,
    NoiseDraw,
    Perturbation,
    Scheme,
    blockade_scenario,
    multiqubit_scenario,
    parameter_set,
    sample_distance,
    superatom_scenario,
    two_qubit_scenario,
)
from rydsim.serialization import scenario_hash
from rydsim.system import DopplerSpec, Scenario

logger = logging.getLogger(__name__)

UK = 1e-6
DEFAULT_TRIALS = 201
CUTOFF_FACTOR = 50.0
"""Blockade cutoff in units of the set's V for scenarios with strongly blockaded control pairs."""


class CampaignKind(str, enum.Enum):
    """What a campaign sweeps."""

    RELATIVE_ERROR = "relative_error"
    DECAY = "decay"
    DDF = "ddf"
    DOPPLER = "doppler"
    BLOCKADE_DOPPLER = "blockade_doppler"
    SUPERATOM = "superatom"
    INTRINSIC = "intrinsic"
    MULTIQUBIT = "multiqubit"


PARAMETERS: dict[CampaignKind, tuple[str, ...]] = {
    CampaignKind.RELATIVE_ERROR: ("T", "omega_2", "V"),
    CampaignKind.DECAY: ("tau",),
    CampaignKind.DDF: ("sigma_d",),
    CampaignKind.DOPPLER: ("temperature",),
    CampaignKind.BLOCKADE_DOPPLER: ("temperature",),
    CampaignKind.SUPERATOM: ("radius",),
    CampaignKind.INTRINSIC: ("scheme",),
    CampaignKind.MULTIQUBIT: ("scheme",),
}

MONTE_CARLO = {CampaignKind.DDF, CampaignKind.DOPPLER, CampaignKind.BLOCKADE_DOPPLER}

GRID_BOUNDS: dict[CampaignKind, tuple[float, bool]] = {
    CampaignKind.RELATIVE_ERROR: (-1.0, True),
    CampaignKind.DECAY: (0.0, True),
    CampaignKind.DDF: (0.0, False),
    CampaignKind.DOPPLER: (0.0, False),
    CampaignKind.BLOCKADE_DOPPLER: (0.0, False),
    CampaignKind.SUPERATOM: (0.0, True),
}
"""Lower bound of the grid values per kind, and whether it is strict."""

DEFAULT_SETS = {
    CampaignKind.RELATIVE_ERROR: "ratio",
    CampaignKind.DECAY: "n70",
    CampaignKind.DOPPLER: "fast-1mhz",
    CampaignKind.BLOCKADE_DOPPLER: "fast-1mhz",
    CampaignKind.SUPERATOM: "n100",
    CampaignKind.INTRINSIC: "n70",
    CampaignKind.MULTIQUBIT: "ratio",
}

GRID_UNITS = {
    "T": "relative",
    "omega_2": "relative",
    "V": "relative",
    "tau": "µs",
    "sigma_d": "µm",
    "temperature": "µK",
    "radius": "µm",
    "scheme": "",
}


@dataclass(frozen=True, kw_only=True)
class SweepSpec:
    """The configuration of one campaign. Grid values are in config units."""

    kind: CampaignKind = field(
        metadata={"description": "What is swept: one of " + ", ".join(k.value for k in CampaignKind)},
    )

    grid: tuple[float, ...] = field(
        metadata={
            "description": "Grid values: relative offsets δX/X, lifetimes (µs), σ_d (µm), "
            "temperatures (µK), radii (µm) or scheme numbers."
        },
    )

    parameter: str = field(
        default="",
        metadata={"description": "Swept parameter; inferred from kind unless the kind sweeps several."},
    )

    scheme: int = field(
        default=2,
        metadata={"description": "Gate scheme: 1 (Ωm = 2√3Ω2), 2 (strong drive) or 3 (LZS)."},
    )

    trials_per_point: Optional[int] = field(
        default=None,
        metadata={"description": "Monte Carlo trials per grid point; 201 for disorder campaigns, 1 otherwise."},
    )

    base_seed: int = field(
        default=0,
        metadata={"description": "Root of every per-trial random substream."},
    )

    param_set: str = field(
        default="",
        metadata={"description": "Named parameter set; defaults per kind (DDF uses n_state)."},
    )

    relative: bool = field(
        default=False,
        metadata={"description": "Grid values are relative offsets (relative_error only)."},
    )

    n_state: int = field(
        default=70,
        metadata={"description": "Rydberg level of the DDF geometry: 70 (4.8 µm) or 100 (9.6 µm)."},
    )

    n_qubits: int = field(
        default=3,
        metadata={"description": "Atom count for multiqubit campaigns (3 or 4)."},
    )

    def __post_init__(self) -> None:
        try:
            kind = CampaignKind(self.kind)
        except ValueError:
            raise ConfigError(f"unknown campaign kind {self.kind!r}", field="kind") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not self.grid:
            raise ConfigError("grid must not be empty", field="grid")
        allowed = PARAMETERS[kind]
        parameter = self.parameter or (allowed[0] if len(allowed) == 1 else "")
        if parameter not in allowed:
            raise ConfigError(f"{kind.value} sweeps one of {list(allowed)}, got {self.parameter!r}", field="parameter")
        object.__setattr__(self, "parameter", parameter)
        if kind is CampaignKind.RELATIVE_ERROR:
            object.__setattr__(self, "relative", True)
        elif self.relative:
            raise ConfigError(f"{kind.value} grids are absolute", field="relative")
        if self.scheme not in (1, 2, 3):
            raise ConfigError(f"unknown scheme {self.scheme}", field="scheme")
        if self.n_state not in (70, 100):
            raise ConfigError("n_state must be 70 or 100", field="n_state")
        if self.n_qubits not in (3, 4):
            raise ConfigError("n_qubits must be 3 or 4", field="n_qubits")
        trials = self.trials_per_point
        if trials is None:
            trials = DEFAULT_TRIALS if kind in MONTE_CARLO else 1
        if trials < 1:
            raise ConfigError("trials_per_point must be at least 1", field="trials_per_point")
        if trials > 1 and kind not in MONTE_CARLO:
            raise ConfigError(f"{kind.value} is deterministic; use 1 trial", field="trials_per_point")
        object.__setattr__(self, "trials_per_point", int(trials))
        if kind in (CampaignKind.INTRINSIC, CampaignKind.MULTIQUBIT):
            bad = [v for v in self.grid if v not in (1, 2, 3)]
            if bad:
                raise ConfigError(f"scheme grid values must be 1, 2 or 3, got {bad}", field="grid")
        pset = self.param_set or (f"n{self.n_state}" if kind is CampaignKind.DDF else DEFAULT_SETS[kind])
        try:
            params = parameter_set(pset)
        except ValueError as exc:
            raise ConfigError(str(exc), field="param_set") from None
        object.__setattr__(self, "param_set", pset)
        self._check_grid(kind, params.distance)

    def _check_grid(self, kind: CampaignKind, distance: Optional[float]) -> None:
        if kind in (CampaignKind.DDF, CampaignKind.SUPERATOM) and distance is None:
            raise ConfigError(f"{kind.value} needs a parameter set with geometry, {self.param_set!r} has none", field="param_set")
        if kind in GRID_BOUNDS:
            lower, strict = GRID_BOUNDS[kind]
            bad = [v for v in self.grid if not (v > lower if strict else v >= lower)]
            if bad:
                relation = ">" if strict else ">="
                raise ConfigError(f"{kind.value} grid values must be {relation} {lower:g}, got {bad}", field="grid")
        if kind is CampaignKind.SUPERATOM and distance is not None:
            bad = [v for v in self.grid if not v < distance]
            if bad:
                raise ConfigError(f"radii must stay below the target distance {distance:g} µm, got {bad}", field="grid")

    @property
    def trials(self) -> int:
        assert self.trials_per_point is not None
        return self.trials_per_point

    @property
    def grid_unit(self) -> str:
        return GRID_UNITS[self.parameter]

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["kind"] = self.kind.value
        out["grid"] = list(self.grid)
        return out

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> SweepSpec:
        """Create a SweepSpec from a campaign config document, rejecting unknown keys."""
        if not isinstance(mapping, Mapping):
            raise ConfigError("campaign config must be an object")
        _fields = {f.name for f in fields(cls) if f.init}
        unknown = sorted(set(mapping) - _fields)
        if unknown:
            raise ConfigError(f"unknown keys {unknown}", field=unknown[0])
        for key in ("kind", "grid"):
            if key not in mapping:
                raise ConfigError("missing required key", field=key)
        try:
            return cls(**{**mapping, "grid": tuple(mapping["grid"])})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class CampaignPoint:
    """Reduced statistics of one grid value."""

    grid_value: float
    mean_error: float
    std_error: float
    n_trials: int
    mean_fidelity: float


@dataclass
class CampaignResult:
    """Per-grid-point statistics plus the provenance needed to reproduce them."""

    spec: SweepSpec
    points: list[CampaignPoint]
    provenance: dict[str, Any] = field(default_factory=dict)

    COLUMNS = ("grid_value", "mean_error", "std_error", "n_trials")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[getattr(p, c) for c in self.COLUMNS] for p in self.points], columns=list(self.COLUMNS))

    def means(self) -> npt.NDArray[np.float64]:
        return np.array([p.mean_error for p in self.points])

    def fidelities(self) -> npt.NDArray[np.float64]:
        return np.array([p.mean_fidelity for p in self.points])


@dataclass(frozen=True)
class TrialTask:
    """One (grid point, trial) unit of work; picklable for worker processes."""

    spec: SweepSpec
    grid_index: int
    trial_index: int
    integrator: IntegratorConfig
    reference: Optional[float] = None


def trial_rng(base_seed: int, grid_index: int, trial_index: int) -> np.random.Generator:
    """Get the independent Philox substream of one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([base_seed, grid_index, trial_index])))


def reference_scenario(spec: SweepSpec) -> Scenario:
    """Get the noiseless, unperturbed scenario a campaign is measured against."""
    kind = spec.kind
    if kind is CampaignKind.BLOCKADE_DOPPLER:
        return blockade_scenario()
    if kind is CampaignKind.SUPERATOM:
        return superatom_scenario(spec.grid[0], spec.param_set, scheme=spec.scheme)
    if kind is CampaignKind.MULTIQUBIT:
        return multiqubit_scenario(spec.n_qubits, spec.scheme, spec.param_set)
    return two_qubit_scenario(spec.scheme, spec.param_set)


def campaign_integrator(spec: SweepSpec, cfg: Optional[IntegratorConfig] = None) -> IntegratorConfig:
    """Fill in a blockade cutoff where control pairs are blockaded far beyond every drive."""
    cfg = cfg or IntegratorConfig()
    needs_cutoff = spec.kind is CampaignKind.SUPERATOM or (
        spec.kind is CampaignKind.MULTIQUBIT and spec.n_qubits == 4
    )
    if needs_cutoff and cfg.blockade_cutoff is None:
        cfg = replace(cfg, blockade_cutoff=CUTOFF_FACTOR * parameter_set(spec.param_set).v)
    return cfg


def evaluate_trial(task: TrialTask) -> tuple[float, float]:
    """Run one trial and return (error, fidelity)."""
    spec, cfg = task.spec, task.integrator
    value = spec.grid[task.grid_index]
    kind = spec.kind
    ref = task.reference

    if kind is CampaignKind.RELATIVE_ERROR:
        scenario = two_qubit_scenario(spec.scheme, spec.param_set, perturbation=Perturbation.of(spec.parameter, value))
        f = gate_fidelity(scenario, cfg)
        return 1.0 - f, f
    if kind is CampaignKind.INTRINSIC:
        f = gate_fidelity(two_qubit_scenario(int(value), spec.param_set), cfg)
        return 1.0 - f, f
    if kind is CampaignKind.MULTIQUBIT:
        f = gate_fidelity(multiqubit_scenario(spec.n_qubits, int(value), spec.param_set), cfg)
        return 1.0 - f, f
    if kind is CampaignKind.SUPERATOM:
        f = gate_fidelity(superatom_scenario(value, spec.param_set, scheme=spec.scheme), cfg)
        return 1.0 - f, f

    assert ref is not None
    if kind is CampaignKind.DECAY:
        scenario = two_qubit_scenario(spec.scheme, spec.param_set, noise=NoiseDraw(tau=value * US))
        f = gate_fidelity(scenario, cfg)
        return isolated_error(ref, f), f

    # Zero disorder reproduces the reference exactly.
    if value == 0.0:
        return (1.0 - ref if kind is CampaignKind.BLOCKADE_DOPPLER else 0.0), ref
    rng = trial_rng(spec.base_seed, task.grid_index, task.trial_index)
    if kind is CampaignKind.DDF:
        distance = parameter_set(spec.param_set).distance
        if distance is None:
            raise ConfigError(f"parameter set {spec.param_set!r} has no geometry for distance disorder", field="param_set")
        d = sample_distance(rng, distance, value)
        scenario = two_qubit_scenario(
            spec.scheme, spec.param_set, noise=NoiseDraw(ddf_distance=d, ddf_sigma=value)
        )
        f = gate_fidelity(scenario, cfg)
        return isolated_error(ref, f), f
    doppler = DopplerSpec(temperature=value * UK)
    shifts = tuple(float(s) for s in rng.normal(0.0, doppler.sigma_delta, size=2))
    if kind is CampaignKind.BLOCKADE_DOPPLER:
        f = gate_fidelity(blockade_scenario(doppler_shifts=shifts, doppler=doppler), cfg)
        return 1.0 - f, f
    scenario = two_qubit_scenario(
        spec.scheme, spec.param_set, noise=NoiseDraw(doppler_shifts=shifts, doppler=doppler)
    )
    f = gate_fidelity(scenario, cfg)
    return isolated_error(ref, f), f


def _aggregate(value: float, outcomes: Sequence[tuple[float, float]]) -> CampaignPoint:
    errors = np.array([e for e, _ in outcomes])
    fids = np.array([f for _, f in outcomes])
    n = errors.size
    std_error = float(errors.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return CampaignPoint(
        grid_value=value,
        mean_error=float(np.clip(errors.mean(), 0.0, 1.0)),
        std_error=std_error,
        n_trials=n,
        mean_fidelity=float(fids.mean()),
    )


def run_campaign(
    spec: SweepSpec,
    cfg: Optional[IntegratorConfig] = None,
    *,
    jobs: int = 1,
    progress: bool = True,
) -> CampaignResult:
    """Run every (grid point, trial) task and reduce in index order.

    Args:
        spec: What to sweep.
        cfg: Integrator settings shared by all trials.
        jobs: Worker processes; results do not depend on it.
        progress: Show a progress bar.

    Returns:
        Statistics per grid point with provenance.
    """
    cfg = campaign_integrator(spec, cfg)
    nominal = reference_scenario(spec)
    reference = None
    if spec.kind in (CampaignKind.DECAY, *MONTE_CARLO):
        reference = gate_fidelity(nominal, cfg)
        logger.info("%s reference fidelity %.10f", spec.kind.value, reference)
    tasks = [
        TrialTask(spec, gi, ti, cfg, reference)
        for gi in range(len(spec.grid))
        for ti in range(spec.trials)
    ]
    desc = f"{spec.kind.value}[{spec.parameter}]"
    if jobs > 1:
        outcomes = process_map(
            evaluate_trial, tasks, max_workers=jobs, chunksize=max(1, len(tasks) // (8 * jobs)), desc=desc, disable=not progress
        )
    else:
        outcomes = [evaluate_trial(t) for t in tqdm(tasks, desc=desc, disable=not progress)]
    points = [
        _aggregate(value, outcomes[gi * spec.trials : (gi + 1) * spec.trials])
        for gi, value in enumerate(spec.grid)
    ]
    provenance = {
        "scenario_hash": scenario_hash(nominal),
        "base_seed": spec.base_seed,
        "reference_fidelity": reference,
    }
    return CampaignResult(spec=spec, points=points, provenance=provenance)


def sweep_relative_error(
    parameter: str, grid: Sequence[float], scheme: int, param_set: str = "ratio", **kwargs: Any
) -> CampaignResult:
    """Sweep δX/X on the gate time (T), the target Rabi frequency (omega_2) or the interaction (V)."""
    spec = SweepSpec(kind=CampaignKind.RELATIVE_ERROR, parameter=parameter, grid=tuple(grid), scheme=scheme, param_set=param_set)
    return run_campaign(spec, **kwargs)


def decay_error_scan(taus_us: Sequence[float], scheme: int, param_set: str = "n70", **kwargs: Any) -> CampaignResult:
    """Get E_de against the Rydberg lifetime (µs) from Lindblad runs."""
    spec = SweepSpec(kind=CampaignKind.DECAY, grid=tuple(taus_us), scheme=scheme, param_set=param_set)
    return run_campaign(spec, **kwargs)


def ddf_monte_carlo(
    sigmas_um: Sequence[float], scheme: int, n_state: int = 70, *, trials: int = DEFAULT_TRIALS, base_seed: int = 0, **kwargs: Any
) -> CampaignResult:
    """Get the mean E_dd over Gaussian draws of the pair distance."""
    spec = SweepSpec(
        kind=CampaignKind.DDF, grid=tuple(sigmas_um), scheme=scheme, n_state=n_state, trials_per_point=trials, base_seed=base_seed
    )
    return run_campaign(spec, **kwargs)


def doppler_monte_carlo(
    temperatures_uk: Sequence[float],
    scheme: int,
    param_set: str = "fast-1mhz",
    *,
    trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
    **kwargs: Any,
) -> CampaignResult:
    """Get the mean E_do over independent Doppler detuning pairs (δ1, δ2)."""
    spec = SweepSpec(
        kind=CampaignKind.DOPPLER,
        grid=tuple(temperatures_uk),
        scheme=scheme,
        param_set=param_set,
        trials_per_point=trials,
        base_seed=base_seed,
    )
    return run_campaign(spec, **kwargs)


def blockade_baseline_doppler(
    temperatures_uk: Sequence[float], *, trials: int = DEFAULT_TRIALS, base_seed: int = 0, **kwargs: Any
) -> CampaignResult:
    """Get 1 − F of the π–2π–π blockade gate under Doppler sampling."""
    spec = SweepSpec(
        kind=CampaignKind.BLOCKADE_DOPPLER, grid=tuple(temperatures_uk), trials_per_point=trials, base_seed=base_seed
    )
    return run_campaign(spec, **kwargs)


def superatom_radius_scan(radii_um: Sequence[float], param_set: str = "n100", **kwargs: Any) -> CampaignResult:
    """Get the four-atom gate fidelity at 10 µs against the control-ensemble radius."""
    spec = SweepSpec(kind=CampaignKind.SUPERATOM, grid=tuple(radii_um), param_set=param_set)
    return run_campaign(spec, **kwargs)


def intrinsic_error_scan(param_set: str = "n70", **kwargs: Any) -> CampaignResult:
    """Get E_in at the nominal gate time for schemes 1-3."""
    spec = SweepSpec(kind=CampaignKind.INTRINSIC, grid=(1.0, 2.0, 3.0), param_set=param_set)
    return run_campaign(spec, **kwargs)


def multiqubit_fidelity(
    n: int, scheme: int, param_set: str = "ratio", cfg: Optional[IntegratorConfig] = None
) -> GateReport:
    """Run the n-qubit phase gate and report F(t); four atoms use a blockade cutoff."""
    if Scheme(scheme) is Scheme.RAMAN:
        raise ValueError("multiqubit gates use scheme 2 or 3")
    spec = SweepSpec(kind=CampaignKind.MULTIQUBIT, grid=(float(scheme),), scheme=scheme, n_qubits=n, param_set=param_set)
    return run_scenario(multiqubit_scenario(n, scheme, param_set), campaign_integrator(spec, cfg)).report
