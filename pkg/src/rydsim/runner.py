"""Run scenarios end to end and isolate the error contributed by each noise source."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError
from rydsim.gates import GateReport, PlateauMetrics, gate_report, isolated_error, plateau_scan
from rydsim.operators import DensityMatrix, basis_labels
from rydsim.propagation import Trajectory, evolve_lindblad, evolve_schrodinger
from rydsim.schemes import sample_distance
from rydsim.serialization import scenario_hash
from rydsim.system import (
    DDFSpec,
    NoiseSpec,
    Scenario,
    assemble_collapse_ops,
    assemble_hamiltonian,
)

logger = logging.getLogger(__name__)

NOISE_SOURCES = ("decay", "ddf", "doppler")
ERROR_KEYS = {"decay": "E_de", "ddf": "E_dd", "doppler": "E_do"}


@dataclass
class RunResult:
    """Everything one simulate run produces."""

    scenario: Scenario
    trajectory: Trajectory
    report: GateReport
    plateau: Optional[PlateauMetrics] = None


def _with_gate_time(cfg: IntegratorConfig, scenario: Scenario) -> IntegratorConfig:
    """Ensure the evaluation time is one of the samples."""
    times = np.asarray(cfg.sample_times, dtype=float)
    if times.size == 0:
        times = np.linspace(0.0, scenario.t_final, cfg.n_samples)
    times = np.union1d(times, [scenario.evaluation_time])
    return replace(cfg, sample_times=tuple(times))


def run_scenario(
    scenario: Scenario,
    cfg: Optional[IntegratorConfig] = None,
    *,
    plateau: Optional[tuple[float, float]] = None,
    plateau_label: Optional[str] = None,
) -> RunResult:
    """Propagate a scenario and score it against its gate target.

    Decay switches to the Lindblad equation; everything else stays a pure
    state. The report's ``fidelities["F"]`` is read at the evaluation time.
    ``errors["E_in"]`` is filled only for noiseless scenarios; use
    ``simulate_scenario`` for the error budget of a noisy one.

    Args:
        scenario: The gate run.
        cfg: Integrator settings.
        plateau: Optional time window (s) for plateau metrics.
        plateau_label: Computational state whose phase the plateau tracks.

    Returns:
        Trajectory, gate report and plateau metrics.
    """
    cfg = _with_gate_time(cfg or IntegratorConfig(), scenario)
    hamiltonian = assemble_hamiltonian(scenario)
    labels = basis_labels(scenario.schemes)
    if scenario.noise.tau is not None:
        traj = evolve_lindblad(
            hamiltonian,
            assemble_collapse_ops(scenario),
            DensityMatrix.from_state(scenario.initial_state),
            cfg,
            labels=labels,
        )
    else:
        traj = evolve_schrodinger(hamiltonian, scenario.initial_state, cfg, labels=labels)
    traj.metadata["scenario_hash"] = scenario_hash(scenario)
    report = gate_report(traj.times, traj.states, scenario.initial_state, scenario.target, scenario.schemes)
    report.fidelities["F"] = report.fidelity_at(scenario.evaluation_time)
    if not active_sources(scenario):
        report.errors["E_in"] = max(0.0, 1.0 - report.fidelities["F"])
    metrics = plateau_scan(report, plateau, plateau_label) if plateau is not None else None
    logger.info("%s: F(%.4g s) = %.10f", scenario.name or "scenario", scenario.evaluation_time, report.fidelities["F"])
    return RunResult(scenario=scenario, trajectory=traj, report=report, plateau=metrics)


def gate_fidelity(scenario: Scenario, cfg: Optional[IntegratorConfig] = None) -> float:
    """Get F at the evaluation time, sampling nothing else."""
    cfg = replace(cfg or IntegratorConfig(), sample_times=(scenario.evaluation_time,))
    return run_scenario(scenario, cfg).report.fidelities["F"]


def strip_noise(scenario: Scenario, keep: Iterable[str] = ()) -> Scenario:
    """Switch off every noise source except those named in keep.

    Sources are ``decay`` (Lindblad τ), ``ddf`` (sampled distance term) and
    ``doppler`` (coupling phases). Level schemes are left alone.
    """
    keep = set(keep)
    unknown = keep - set(NOISE_SOURCES)
    if unknown:
        raise ValueError(f"unknown noise sources {sorted(unknown)}")
    noise = scenario.noise
    drives = scenario.drives
    interactions = scenario.interactions
    if "doppler" not in keep:
        drives = tuple(replace(d, doppler_shift=0.0) for d in drives)
    if "ddf" not in keep:
        interactions = replace(interactions, ddf=None)
    noise = NoiseSpec(
        tau=noise.tau if "decay" in keep else None,
        ddf_sigma=noise.ddf_sigma if "ddf" in keep else None,
        doppler=noise.doppler if "doppler" in keep else None,
    )
    return scenario.with_changes(drives=drives, interactions=interactions, noise=noise)


def active_sources(scenario: Scenario) -> list[str]:
    """List the noise sources a scenario actually carries."""
    sources = []
    if scenario.noise.tau is not None and math.isfinite(scenario.noise.tau):
        sources.append("decay")
    if scenario.interactions.ddf is not None:
        sources.append("ddf")
    if any(d.doppler_shift for d in scenario.drives):
        sources.append("doppler")
    return sources


def error_report(
    scenario: Scenario,
    cfg: Optional[IntegratorConfig] = None,
    sources: Optional[Iterable[str]] = None,
) -> GateReport:
    """Compute E_in and the isolated error of each noise source.

    E_in = 1 − F of the noiseless run at the evaluation time. Every source x
    is then switched on alone and E_x = max(0, F_noiseless − F_x). Sources
    that are off report 0.

    Args:
        scenario: Scenario carrying the noise realization.
        cfg: Integrator settings.
        sources: Sources to isolate; defaults to those the scenario carries.

    Returns:
        The noiseless gate report with ``errors`` and ``fidelities`` filled.
    """
    noiseless = run_scenario(strip_noise(scenario), cfg).report
    f0 = noiseless.fidelities["F"]
    requested = active_sources(scenario) if sources is None else list(sources)
    for source in NOISE_SOURCES:
        key = ERROR_KEYS[source]
        if source not in requested:
            noiseless.errors[key] = 0.0
            continue
        f_x = gate_fidelity(strip_noise(scenario, keep=(source,)), cfg)
        noiseless.fidelities[f"F_{source}"] = f_x
        noiseless.errors[key] = isolated_error(f0, f_x)
    return noiseless


def sample_noise(scenario: Scenario) -> Scenario:
    """Realize the Doppler shifts and pair distance that a scenario's noise asks for.

    Draws come from a Philox stream seeded by ``rng_seed``: one Doppler
    shift per atom, then the distance of the atom pair. Sources already
    realized (drives carrying shifts, an interaction carrying a DDF term)
    are left alone.

    Raises:
        ConfigError: Distance disorder on a scenario without two-atom geometry.
    """
    noise = scenario.noise
    if noise.is_quiet:
        return scenario
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(scenario.rng_seed)))
    drives = scenario.drives
    interactions = scenario.interactions
    if noise.doppler is not None and not any(d.doppler_shift for d in drives):
        shifts = rng.normal(0.0, noise.doppler.sigma_delta, size=scenario.n_atoms)
        drives = tuple(replace(d, doppler_shift=float(shifts[d.atom])) for d in drives)
        logger.info("sampled Doppler shifts %s rad/s", np.array2string(shifts, precision=4))
    if noise.ddf_sigma and interactions.ddf is None:
        if interactions.c6 is None or interactions.positions is None or scenario.n_atoms != 2:
            raise ConfigError("distance disorder needs a two-atom c6_geometry interaction", field="noise.ddf")
        d_ideal = math.dist(*interactions.positions)
        d = sample_distance(rng, d_ideal, noise.ddf_sigma)
        interactions = replace(interactions, ddf=DDFSpec(c6=interactions.c6, d_ideal=d_ideal, d_actual=d))
        logger.info("sampled pair distance %.6f µm (ideal %.6f µm)", d, d_ideal)
    return scenario.with_changes(drives=drives, interactions=interactions)


def simulate_scenario(
    scenario: Scenario,
    cfg: Optional[IntegratorConfig] = None,
    *,
    plateau: Optional[tuple[float, float]] = None,
    plateau_label: Optional[str] = None,
) -> RunResult:
    """Realize the scenario's noise, run it, and fill the full error budget.

    The report always carries E_in, E_de, E_dd and E_do. For a noisy
    scenario they come from ``error_report``, so E_in is 1 − F of the
    noiseless run, never of the noisy one.
    """
    scenario = sample_noise(scenario)
    result = run_scenario(scenario, cfg, plateau=plateau, plateau_label=plateau_label)
    errors = result.report.errors
    if active_sources(scenario):
        budget = error_report(scenario, cfg)
        errors.update(budget.errors)
        result.report.fidelities["F_noiseless"] = budget.fidelities["F"]
        result.report.fidelities.update({k: v for k, v in budget.fidelities.items() if k.startswith("F_")})
    else:
        errors.update({key: 0.0 for key in ERROR_KEYS.values()})
    return result
