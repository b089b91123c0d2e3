"""Frozen library of named runs.

Each preset is stored as config-unit JSON text and loaded through the same
parsers as user files, so a preset can always be dumped and edited by hand.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from rydsim.campaigns import SweepSpec
from rydsim.configuration import IntegratorConfig
from rydsim.schemes import (
    LZS_PLATEAU,
    US,
    NoiseDraw,
    Scheme,
    blockade_scenario,
    multiqubit_scenario,
    parameter_set,
    plateau_window,
    two_qubit_scenario,
)
from rydsim.serialization import SimulationConfig, simulation_from_dict, simulation_to_dict
from rydsim.system import Scenario
from rydsim.utils import canonical_json


class PresetKind(str, enum.Enum):
    """The subcommand a preset feeds."""

    SIMULATE = "simulate"
    CAMPAIGN = "campaign"


@dataclass(frozen=True)
class Preset:
    """A named simulate or campaign run; ``documents`` are (label, JSON text) pairs."""

    name: str
    kind: PresetKind
    description: str
    documents: tuple[tuple[str, str], ...]
    fast: bool = False

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.documents]

    def simulations(self) -> list[tuple[str, SimulationConfig]]:
        """Parse the simulate documents."""
        if self.kind is not PresetKind.SIMULATE:
            raise ValueError(f"{self.name} is a campaign preset")
        return [(label, simulation_from_dict(json.loads(text))) for label, text in self.documents]

    def sweeps(self) -> list[tuple[str, SweepSpec]]:
        """Parse the campaign documents."""
        if self.kind is not PresetKind.CAMPAIGN:
            raise ValueError(f"{self.name} is a simulate preset")
        return [(label, SweepSpec.from_mapping(json.loads(text))) for label, text in self.documents]


def _simulate(
    name: str,
    description: str,
    scenario: Scenario,
    *,
    integrator: Optional[IntegratorConfig] = None,
    plateau: Optional[tuple[float, float]] = None,
    fast: bool = False,
) -> Preset:
    config = SimulationConfig(scenario=scenario, integrator=integrator or IntegratorConfig(), plateau=plateau)
    text = canonical_json(simulation_to_dict(config))
    return Preset(name=name, kind=PresetKind.SIMULATE, description=description, documents=((name, text),), fast=fast)


def _campaign(name: str, description: str, sweeps: Sequence[tuple[str, Mapping[str, Any]]]) -> Preset:
    documents = tuple((label, canonical_json(SweepSpec.from_mapping(doc).to_dict())) for label, doc in sweeps)
    return Preset(name=name, kind=PresetKind.CAMPAIGN, description=description, documents=documents)


def _lzs_run(scenario_of: Any, omega_2: float) -> tuple[Scenario, tuple[float, float]]:
    """Extend an LZS scenario to 5 target periods and attach the plateau window."""
    t_final = (LZS_PLATEAU[1] + 0.5) * 2 * math.pi / omega_2
    return scenario_of(t_final), plateau_window(omega_2)


def _build_presets() -> dict[str, Preset]:
    ratio = parameter_set("ratio")
    n70 = parameter_set("n70")
    four_qubit = IntegratorConfig(blockade_cutoff=50 * ratio.v)

    fig4, fig4_window = _lzs_run(lambda t: two_qubit_scenario(Scheme.LZS, ratio, t_final=t, name="fig4"), ratio.omega_2)
    fig10_lzs, fig10_window = _lzs_run(lambda t: multiqubit_scenario(3, Scheme.LZS, ratio, t_final=t, name="fig10-lzs"), ratio.omega_2)
    fig11_lzs, fig11_window = _lzs_run(lambda t: multiqubit_scenario(4, Scheme.LZS, ratio, t_final=t, name="fig11-lzs"), ratio.omega_2)

    presets = [
        _simulate(
            "fig2",
            "Scheme 1 CZ (Ωm = 2√3Ω2, V = ω = 500Ω2) over one target period",
            two_qubit_scenario(Scheme.RAMAN, ratio, name="fig2"),
            fast=True,
        ),
        _simulate(
            "fig3",
            "Scheme 2 CZ (Ωm = 100Ω2): |11⟩ frozen by the strong drive",
            two_qubit_scenario(Scheme.STRONG, ratio, name="fig3"),
            fast=True,
        ),
        _simulate(
            "fig4",
            "Scheme 3 LZS CZ (Δ̄ = 6Ω2, Δ0 = 5Ω2, ω̄ = 0.5Ω2) with plateau Ω2t/2π ∈ [3.5, 4.5]",
            fig4,
            plateau=fig4_window,
            fast=True,
        ),
        *(
            _simulate(
                f"fig6-s{int(s)}",
                f"Intrinsic error E_in(t) of scheme {int(s)} with the 70S geometry",
                two_qubit_scenario(s, n70, name=f"fig6-s{int(s)}"),
            )
            for s in Scheme
        ),
        _simulate(
            "fig7-point",
            "Scheme 2 with 70S geometry and τ = 1 ms Rydberg decay (Lindblad)",
            two_qubit_scenario(Scheme.STRONG, n70, noise=NoiseDraw(tau=1000 * US), name="fig7-point"),
        ),
        _simulate(
            "blockade",
            "π–2π–π blockade CZ baseline (V/2π = 467 MHz, Ωr/2π = 10 MHz)",
            blockade_scenario(),
            fast=True,
        ),
        _simulate(
            "fig10",
            "Three-qubit phase gate, scheme 2, V13 = V23 = V12 = V",
            multiqubit_scenario(3, Scheme.STRONG, ratio, name="fig10"),
        ),
        _simulate(
            "fig10-lzs",
            "Three-qubit phase gate, scheme 3, with LZS plateau",
            fig10_lzs,
            plateau=fig10_window,
        ),
        _simulate(
            "fig11",
            "Four-qubit phase gate, scheme 2, controls blockaded (100V, 200V, 500V)",
            multiqubit_scenario(4, Scheme.STRONG, ratio, name="fig11"),
            integrator=four_qubit,
        ),
        _simulate(
            "fig11-lzs",
            "Four-qubit phase gate, scheme 3, with LZS plateau",
            fig11_lzs,
            integrator=four_qubit,
            plateau=fig11_window,
        ),
        _campaign(
            "fig5",
            "Fidelity against δT/T, δΩ2/Ω2 and δV/V for schemes 1-3",
            [
                (f"{param}-s{scheme}", {"kind": "relative_error", "parameter": param, "scheme": scheme, "grid": _RELATIVE_GRID})
                for param in ("T", "omega_2", "V")
                for scheme in (1, 2, 3)
            ],
        ),
        _campaign(
            "fig6",
            "Intrinsic error E_in at the nominal gate time for schemes 1-3 (70S geometry)",
            [("intrinsic", {"kind": "intrinsic", "grid": [1, 2, 3], "param_set": "n70"})],
        ),
        _campaign(
            "fig7",
            "Decay error E_de against the Rydberg lifetime τ (µs)",
            [(f"s{scheme}", {"kind": "decay", "scheme": scheme, "grid": _TAU_GRID}) for scheme in (1, 2, 3)],
        ),
        _campaign(
            "fig8",
            "DDF error E_dd against the distance spread σ_d (µm), 201 trials",
            [
                (f"s{scheme}-n{n}", {"kind": "ddf", "scheme": scheme, "n_state": n, "grid": grid, "base_seed": 8})
                for scheme, grid in ((1, _DDF_GRID_WEAK), (2, _DDF_GRID_STRONG))
                for n in (70, 100)
            ],
        ),
        *(
            _campaign(
                name,
                f"Doppler error E_do against T_a (µK) with {pset}, plus the blockade baseline",
                [
                    *(
                        (f"s{scheme}", {"kind": "doppler", "scheme": scheme, "param_set": pset, "grid": _TEMPERATURE_GRID, "base_seed": 9})
                        for scheme in (1, 2)
                    ),
                    ("blockade", {"kind": "blockade_doppler", "grid": _TEMPERATURE_GRID, "base_seed": 9}),
                ],
            )
            for name, pset in (("fig9a", "fast-1mhz"), ("fig9b", "fast-5mhz"))
        ),
        _campaign(
            "fig12",
            "Four-atom superatom gate fidelity at 10 µs against the control radius R (µm)",
            [("radius", {"kind": "superatom", "grid": _RADIUS_GRID})],
        ),
    ]
    return {p.name: p for p in presets}


_RELATIVE_GRID = [round(float(x), 4) for x in np.linspace(-0.1, 0.1, 9)]
_TAU_GRID = [100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0]
_DDF_GRID_WEAK = [0.0, 0.002, 0.004, 0.006, 0.008, 0.01]
_DDF_GRID_STRONG = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14]
_TEMPERATURE_GRID = [0.0, 10.0, 20.0, 30.0, 40.0, 46.0, 50.0]
_RADIUS_GRID = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03]

PRESETS: dict[str, Preset] = _build_presets()


def get_preset(name: str) -> Preset:
    """Look up a preset by name."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; run `rydsim list-presets`") from None


def fast_presets() -> list[Preset]:
    """List the presets rerun by golden checks."""
    return [p for p in PRESETS.values() if p.fast]


def describe(preset: Preset) -> str:
    """Render a one-line description with the sweep labels of campaigns."""
    if preset.kind is PresetKind.CAMPAIGN:
        return f"{preset.description} [{', '.join(preset.labels)}]"
    return preset.description

