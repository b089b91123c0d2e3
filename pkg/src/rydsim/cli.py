"""Command-line entry point: ``rydsim simulate|campaign|check|list-presets``.

Exit codes: 0 success, 1 golden regression, 2 configuration or tolerance
error, 3 integrator failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from rich.markup import escape
from rich.table import Table

from rydsim.campaigns import MONTE_CARLO, SweepSpec, run_campaign
from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError, GoldenMismatchError, IntegrationError
from rydsim.goldens import CheckOutcome, check_goldens, raise_for_regressions, update_goldens
from rydsim.outputs import RunManifest, emit_plot_script, write_campaign, write_simulation
from rydsim.presets import PRESETS, Preset, PresetKind, describe, get_preset
from rydsim.runner import simulate_scenario
from rydsim.serialization import SimulationConfig, load_document, scenario_hash, simulation_from_dict, simulation_to_dict
from rydsim.utils import configure_logging, console, listing_console, resolve_seed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REGRESSION = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for every subcommand."""
    parser = argparse.ArgumentParser(
        prog="rydsim",
        description="Simulate Rydberg antiblockade phase gates and their error budgets.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Raise log verbosity (-v info, -vv debug).")
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars and result tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("config", nargs="?", type=Path, help="JSON config file.")
        p.add_argument("--preset", help="Named preset instead of a config file.")
        p.add_argument("--out", type=Path, default=Path("out"), help="Output directory (default: ./out).")
        p.add_argument("--seed", type=int, help="Seed override; falls back to RYDSIM_SEED, then the config.")
        p.add_argument("--tol", type=float, help="Relative integrator tolerance override.")
        p.add_argument("--emit-plot-script", action="store_true", help="Write plot.py beside the CSVs.")

    simulate = sub.add_parser("simulate", help="Propagate one scenario and score the gate.")
    add_run_options(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    campaign = sub.add_parser("campaign", help="Run a parameter sweep or Monte Carlo campaign.")
    add_run_options(campaign)
    campaign.add_argument("--jobs", type=int, default=1, help="Worker processes; results do not depend on it.")
    campaign.add_argument("--trials", type=int, help="Override trials per point of Monte Carlo sweeps.")
    campaign.set_defaults(handler=cmd_campaign)

    check = sub.add_parser("check", help="Compare fast presets against golden summaries.")
    check.add_argument("--goldens", type=Path, required=True, help="Directory with tolerances.json and goldens.")
    check.add_argument("--update", action="store_true", help="Regenerate the golden summaries.")
    check.add_argument("--preset", action="append", dest="presets", help="Restrict to this preset (repeatable).")
    check.set_defaults(handler=cmd_check)

    listing = sub.add_parser("list-presets", help="Show the preset library.")
    listing.set_defaults(handler=cmd_list_presets)
    return parser


def _preset(name: str, kind: PresetKind) -> Preset:
    try:
        preset = get_preset(name)
    except ValueError as exc:
        raise ConfigError(str(exc), field="preset") from None
    if preset.kind is not kind:
        raise ConfigError(f"{name} is a {preset.kind.value} preset; use `rydsim {preset.kind.value}`", field="preset")
    return preset


def _source(args: argparse.Namespace) -> str:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("give exactly one of a config file or --preset")
    return f"preset:{args.preset}" if args.preset else str(args.config)


def load_simulations(args: argparse.Namespace) -> list[tuple[str, SimulationConfig]]:
    """Resolve the runs of ``simulate`` with seed and tolerance overrides applied."""
    _source(args)
    if args.preset:
        runs = _preset(args.preset, PresetKind.SIMULATE).simulations()
    else:
        runs = [(args.config.stem, load_document(args.config, simulation_from_dict))]
    resolved = []
    for label, config in runs:
        scenario = config.scenario.with_changes(rng_seed=resolve_seed(args.seed, config.scenario.rng_seed))
        integrator = config.integrator.with_tolerance(args.tol) if args.tol else config.integrator
        resolved.append((label, replace(config, scenario=scenario, integrator=integrator)))
    return resolved


def load_sweeps(args: argparse.Namespace) -> list[tuple[str, SweepSpec]]:
    """Resolve the sweeps of ``campaign`` with seed and trial overrides applied."""
    _source(args)
    if args.preset:
        sweeps = _preset(args.preset, PresetKind.CAMPAIGN).sweeps()
    else:
        sweeps = [(args.config.stem, load_document(args.config, SweepSpec.from_mapping))]
    if args.trials is not None and args.trials < 1:
        raise ConfigError("--trials must be at least 1", field="trials")
    resolved = []
    for label, spec in sweeps:
        changes: dict[str, int] = {"base_seed": resolve_seed(args.seed, spec.base_seed)}
        if args.trials is not None and spec.kind in MONTE_CARLO:
            changes["trials_per_point"] = args.trials
        resolved.append((label, replace(spec, **changes)))
    return resolved


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run every scenario of a config or preset and write its artifacts."""
    runs = load_simulations(args)
    first = runs[0][1]
    manifest = RunManifest.start("simulate", _source(args), first.scenario.rng_seed, first.integrator)
    table = Table("run", "F(T)", "E_in", "plateau min F", title="simulate")
    written = []
    for label, config in runs:
        result = simulate_scenario(
            config.scenario, config.integrator, plateau=config.plateau, plateau_label=config.plateau_label
        )
        written += write_simulation(args.out, label, result)
        manifest.runs[label] = {
            "config": simulation_to_dict(config),
            "scenario_hash": scenario_hash(config.scenario),
        }
        plateau = f"{result.plateau.min_fidelity:.6f}" if result.plateau else "-"
        table.add_row(label, f"{result.report.fidelities['F']:.10f}", f"{result.report.errors['E_in']:.3e}", plateau)
    if args.emit_plot_script:
        written.append(emit_plot_script(args.out, written))
    manifest.add_outputs(written)
    manifest.finish(args.out)
    if not args.quiet:
        console.print(table)
    return EXIT_OK


def cmd_campaign(args: argparse.Namespace) -> int:
    """Run every sweep of a config or preset and write one CSV per sweep."""
    sweeps = load_sweeps(args)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1", field="jobs")
    integrator = None
    if args.tol:
        integrator = IntegratorConfig().with_tolerance(args.tol)
    manifest = RunManifest.start("campaign", _source(args), sweeps[0][1].base_seed, integrator)
    progress = not args.quiet and sys.stderr.isatty()
    table = Table("sweep", "kind", "points", "trials", "max mean error", title="campaign")
    written = []
    for label, spec in sweeps:
        result = run_campaign(spec, integrator, jobs=args.jobs, progress=progress)
        written.append(write_campaign(args.out, label, result))
        manifest.runs[label] = {"spec": spec.to_dict(), **result.provenance}
        table.add_row(label, spec.kind.value, str(len(spec.grid)), str(spec.trials), f"{result.means().max():.3e}")
    if args.emit_plot_script:
        written.append(emit_plot_script(args.out, written))
    manifest.add_outputs(written)
    manifest.finish(args.out)
    if not args.quiet:
        console.print(table)
    return EXIT_OK


def _outcome_table(outcomes: Sequence[CheckOutcome], title: str) -> Table:
    table = Table("preset", "metric", "value", "status", title=title)
    for outcome in outcomes:
        for metric, value in outcome.metrics.items():
            status = "[red]FAIL[/red]" if metric in outcome.diffs else "[green]ok[/green]"
            table.add_row(outcome.preset, metric, f"{value:.10g}", status)
    return table


def cmd_check(args: argparse.Namespace) -> int:
    """Rerun the fast presets and compare with (or regenerate) their goldens."""
    if args.update:
        outcomes = update_goldens(args.goldens, args.presets)
        if not args.quiet:
            console.print(_outcome_table(outcomes, "goldens updated"))
        return EXIT_OK
    outcomes = check_goldens(args.goldens, args.presets)
    if not args.quiet:
        console.print(_outcome_table(outcomes, "golden check"))
    raise_for_regressions(outcomes)
    return EXIT_OK


def cmd_list_presets(args: argparse.Namespace) -> int:
    """Render the preset library."""
    table = Table("name", "kind", "fast", "description", title="presets")
    for preset in PRESETS.values():
        table.add_row(preset.name, preset.kind.value, "yes" if preset.fast else "", describe(preset))
    listing_console.print(table)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return int(args.handler(args))
    except ConfigError as exc:
        console.print(f"[bold red]config error[/bold red]: {escape(str(exc))}")
        return EXIT_CONFIG
    except IntegrationError as exc:
        console.print(f"[bold red]integration failed[/bold red]: {escape(str(exc))}")
        return EXIT_INTEGRATION
    except GoldenMismatchError as exc:
        console.print(f"[bold red]regression[/bold red]: {escape(str(exc))}")
        return EXIT_REGRESSION
