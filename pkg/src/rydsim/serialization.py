"""JSON documents for scenarios and simulate configs.

Documents use config units: frequencies in MHz (the value of f = ω/2π),
times in µs, distances in µm, temperatures in µK and C6 in MHz·µm⁶.

Example scenario::

    {
      "name": "fig2",
      "atoms": [{"levels": ["g0", "g1", "ryd"]}, {"levels": ["g0", "g1", "ryd"]}],
      "drives": [
        {"atom": 0, "kind": "amplitude_modulated", "rabi": 0.3464, "mod_freq": 50.0},
        {"atom": 1, "kind": "constant", "rabi": 0.1}
      ],
      "interactions": {"explicit": [{"pair": [0, 1], "strength": 50.0}]},
      "noise": {},
      "initial_state": {"amplitudes": {"00": [0.632, 0.0], "01": [0.548, 0.0]}, "normalize": true},
      "t_final": 10.0,
      "target": {"kind": "cz_two_qubit", "n_qubits": 2},
      "seed": 0
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, TypeVar

import numpy as np

from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError
from rydsim.gates import GateTarget
from rydsim.operators import LevelScheme, StateVector, basis_labels, total_dim
from rydsim.system import (
    DDFSpec,
    DopplerSpec,
    DriveKind,
    DriveSpec,
    InteractionSpec,
    NoiseSpec,
    Scenario,
    StarkShift,
)
from rydsim.utils import digest

MHZ = 2.0 * math.pi * 1e6
US = 1e-6
UK = 1e-6

SCENARIO_KEYS = {
    "name",
    "atoms",
    "drives",
    "interactions",
    "noise",
    "initial_state",
    "t_final",
    "gate_time",
    "target",
    "seed",
}
SIMULATE_KEYS = SCENARIO_KEYS | {"integrator", "plateau"}

_DRIVE_FREQS = ("rabi", "mod_freq", "delta0", "delta_bar", "omega_bar", "detuning", "doppler_shift")

T = TypeVar("T")


def _check_keys(doc: Any, allowed: set[str], path: str, required: tuple[str, ...] = ()) -> Mapping[str, Any]:
    if not isinstance(doc, Mapping):
        raise ConfigError(f"expected an object, got {type(doc).__name__}", field=path or None)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", field=_join(path, unknown[0]))
    for key in required:
        if key not in doc:
            raise ConfigError("missing required key", field=_join(path, key))
    return doc


def _join(path: str, key: str | int) -> str:
    return f"{path}.{key}" if path else str(key)


def _number(doc: Mapping[str, Any], key: str, path: str, default: Optional[float] = None) -> float:
    value = doc.get(key, default)
    if value is None:
        raise ConfigError("missing required number", field=_join(path, key))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=_join(path, key))
    return float(value)


def _build(path: str, factory: Callable[[], T]) -> T:
    try:
        return factory()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=path or None) from exc


def _drive_from_dict(doc: Any, path: str) -> DriveSpec:
    doc = _check_keys(doc, {"atom", "kind", *_DRIVE_FREQS, "windows", "stark"}, path, ("atom", "kind", "rabi"))
    freqs = {k: _number(doc, k, path) * MHZ for k in _DRIVE_FREQS if k in doc}
    windows = tuple((float(a) * US, float(b) * US) for a, b in doc.get("windows", ()))
    stark = None
    if doc.get("stark") is not None:
        s = _check_keys(doc["stark"], {"ground", "rydberg"}, _join(path, "stark"))
        stark = StarkShift(
            ground=_number(s, "ground", _join(path, "stark"), 0.0) * MHZ,
            rydberg=_number(s, "rydberg", _join(path, "stark"), 0.0) * MHZ,
        )
    return _build(
        path,
        lambda: DriveSpec(
            atom=int(doc["atom"]), kind=DriveKind(doc["kind"]), windows=windows, stark=stark, **freqs
        ),
    )


def _drive_to_dict(drive: DriveSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"atom": drive.atom, "kind": drive.kind.value}
    for key in _DRIVE_FREQS:
        value = getattr(drive, key)
        if key == "rabi" or value:
            out[key] = value / MHZ
    if drive.windows:
        out["windows"] = [[a / US, b / US] for a, b in drive.windows]
    if drive.stark is not None:
        out["stark"] = {"ground": drive.stark.ground / MHZ, "rydberg": drive.stark.rydberg / MHZ}
    return out


def _ddf_from_dict(doc: Any, path: str) -> DDFSpec:
    doc = _check_keys(doc, {"c6", "d_ideal", "d_actual", "pair"}, path, ("c6", "d_ideal", "d_actual"))
    pair = tuple(int(x) for x in doc.get("pair", (0, 1)))
    return _build(
        path,
        lambda: DDFSpec(
            c6=_number(doc, "c6", path) * MHZ,
            d_ideal=_number(doc, "d_ideal", path),
            d_actual=_number(doc, "d_actual", path),
            pair=(pair[0], pair[1]),
        ),
    )


def _interactions_from_dict(doc: Any, path: str) -> InteractionSpec:
    doc = _check_keys(doc, {"explicit", "c6_geometry", "ddf"}, path)
    if ("explicit" in doc) == ("c6_geometry" in doc):
        raise ConfigError("give exactly one of 'explicit' or 'c6_geometry'", field=path)
    ddf = _ddf_from_dict(doc["ddf"], _join(path, "ddf")) if doc.get("ddf") is not None else None
    if "explicit" in doc:
        pairs = {}
        for k, entry in enumerate(doc["explicit"]):
            p = _join(_join(path, "explicit"), k)
            entry = _check_keys(entry, {"pair", "strength"}, p, ("pair", "strength"))
            i, j = _build(_join(p, "pair"), lambda entry=entry: tuple(int(x) for x in entry["pair"]))
            pairs[(i, j)] = _number(entry, "strength", p) * MHZ
        return _build(path, lambda: InteractionSpec.explicit(pairs, ddf=ddf))
    geo_path = _join(path, "c6_geometry")
    geo = _check_keys(doc["c6_geometry"], {"c6", "positions"}, geo_path, ("c6", "positions"))
    return _build(
        geo_path,
        lambda: InteractionSpec.from_geometry(_number(geo, "c6", geo_path) * MHZ, geo["positions"], ddf=ddf),
    )


def _interactions_to_dict(spec: InteractionSpec) -> dict[str, Any]:
    out: dict[str, Any]
    if spec.c6 is not None and spec.positions is not None:
        out = {"c6_geometry": {"c6": spec.c6 / MHZ, "positions": [list(p) for p in spec.positions]}}
    else:
        out = {"explicit": [{"pair": list(k), "strength": v / MHZ} for k, v in spec.pairs]}
    if spec.ddf is not None:
        out["ddf"] = {
            "c6": spec.ddf.c6 / MHZ,
            "d_ideal": spec.ddf.d_ideal,
            "d_actual": spec.ddf.d_actual,
            "pair": list(spec.ddf.pair),
        }
    return out


def _noise_from_dict(doc: Any, path: str) -> NoiseSpec:
    doc = _check_keys(doc, {"decay", "ddf", "doppler"}, path)
    tau = sigma = None
    doppler = None
    if doc.get("decay") is not None:
        p = _join(path, "decay")
        tau = _number(_check_keys(doc["decay"], {"tau"}, p, ("tau",)), "tau", p) * US
    if doc.get("ddf") is not None:
        p = _join(path, "ddf")
        sigma = _number(_check_keys(doc["ddf"], {"sigma"}, p, ("sigma",)), "sigma", p)
    if doc.get("doppler") is not None:
        p = _join(path, "doppler")
        d = _check_keys(doc["doppler"], {"temperature", "k_eff", "mass"}, p, ("temperature",))
        extra = {k: _number(d, k, p) for k in ("k_eff", "mass") if k in d}
        doppler = _build(p, lambda: DopplerSpec(temperature=_number(d, "temperature", p) * UK, **extra))
    return _build(path, lambda: NoiseSpec(tau=tau, ddf_sigma=sigma, doppler=doppler))


def _noise_to_dict(noise: NoiseSpec) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if noise.tau is not None:
        out["decay"] = {"tau": noise.tau / US}
    if noise.ddf_sigma is not None:
        out["ddf"] = {"sigma": noise.ddf_sigma}
    if noise.doppler is not None:
        out["doppler"] = {
            "temperature": noise.doppler.temperature / UK,
            "k_eff": noise.doppler.k_eff,
            "mass": noise.doppler.mass,
        }
    return out


def _complex(value: Any, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"amplitude must be a number or [re, im], got {value!r}", field=path)


def _state_from_dict(doc: Any, schemes: tuple[LevelScheme, ...], path: str) -> StateVector:
    if doc == "uniform":
        return StateVector.uniform_computational(schemes)
    doc = _check_keys(doc, {"amplitudes", "normalize"}, path, ("amplitudes",))
    labels = basis_labels(schemes)
    index = {label: k for k, label in enumerate(labels)}
    amps = np.zeros(total_dim(schemes), dtype=complex)
    for label, value in dict(doc["amplitudes"]).items():
        p = _join(_join(path, "amplitudes"), label)
        if label not in index:
            raise ConfigError(f"unknown basis label {label!r}", field=p)
        amps[index[label]] = _complex(value, p)
    normalize = bool(doc.get("normalize", False))
    return _build(path, lambda: StateVector.normalized(amps) if normalize else StateVector(amps))


def _state_to_dict(state: StateVector, schemes: tuple[LevelScheme, ...]) -> dict[str, Any]:
    amplitudes = {
        label: [float(a.real), float(a.imag)]
        for label, a in zip(basis_labels(schemes), state.amplitudes)
        if a != 0
    }
    return {"amplitudes": amplitudes}


def scenario_from_dict(doc: Any) -> Scenario:
    """Build a Scenario from a config-unit document; unknown keys raise ConfigError."""
    doc = _check_keys(doc, SCENARIO_KEYS, "", ("atoms", "drives", "interactions", "initial_state", "t_final", "target"))
    schemes = []
    for k, atom in enumerate(doc["atoms"]):
        p = _join("atoms", k)
        atom = _check_keys(atom, {"levels"}, p, ("levels",))
        schemes.append(_build(p, lambda atom=atom: LevelScheme(tuple(atom["levels"]))))
    drives = tuple(_drive_from_dict(d, _join("drives", k)) for k, d in enumerate(doc["drives"]))
    interactions = _interactions_from_dict(doc["interactions"], "interactions")
    noise = _noise_from_dict(doc.get("noise", {}), "noise")
    initial = _state_from_dict(doc["initial_state"], tuple(schemes), "initial_state")
    tgt = _check_keys(doc["target"], {"kind", "n_qubits"}, "target", ("kind",))
    target = _build("target", lambda: GateTarget(tgt["kind"], int(tgt.get("n_qubits", len(schemes)))))
    gate_time = _number(doc, "gate_time", "") * US if doc.get("gate_time") is not None else None
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}", field="seed")
    return _build(
        "",
        lambda: Scenario(
            schemes=tuple(schemes),
            drives=drives,
            interactions=interactions,
            initial_state=initial,
            t_final=_number(doc, "t_final", "") * US,
            gate_time=gate_time,
            target=target,
            noise=noise,
            rng_seed=seed,
            name=str(doc.get("name", "")),
        ),
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Dump a Scenario as a config-unit document."""
    doc: dict[str, Any] = {
        "name": scenario.name,
        "atoms": [{"levels": [lv.value for lv in s.levels]} for s in scenario.schemes],
        "drives": [_drive_to_dict(d) for d in scenario.drives],
        "interactions": _interactions_to_dict(scenario.interactions),
        "noise": _noise_to_dict(scenario.noise),
        "initial_state": _state_to_dict(scenario.initial_state, scenario.schemes),
        "t_final": scenario.t_final / US,
        "target": {"kind": scenario.target.kind.value, "n_qubits": scenario.target.n_qubits},
        "seed": scenario.rng_seed,
    }
    if scenario.gate_time is not None:
        doc["gate_time"] = scenario.gate_time / US
    return doc


def scenario_hash(scenario: Scenario) -> str:
    """Get the sha256 digest of the scenario's canonical document."""
    return digest(scenario_to_dict(scenario))


def integrator_from_dict(doc: Any, path: str = "integrator") -> IntegratorConfig:
    """Build an IntegratorConfig from config units (µs for times, MHz for the cutoff)."""
    doc = dict(_check_keys(doc or {}, {f for f in IntegratorConfig.__dataclass_fields__}, path))
    for key in ("max_step", "fixed_step"):
        if doc.get(key) is not None:
            doc[key] = _number(doc, key, path) * US
    if "sample_times" in doc:
        doc["sample_times"] = tuple(float(t) * US for t in doc["sample_times"])
    if doc.get("blockade_cutoff") is not None:
        doc["blockade_cutoff"] = _number(doc, "blockade_cutoff", path) * MHZ
    try:
        return IntegratorConfig.from_mapping(doc)
    except ConfigError as exc:
        inner = exc.field if exc.field and exc.field != "integrator" else None
        raise ConfigError(exc.message, field=_join(path, inner) if inner else path) from exc


def integrator_to_dict(cfg: IntegratorConfig) -> dict[str, Any]:
    """Dump integrator settings in config units."""
    out = cfg.to_dict()
    for key in ("max_step", "fixed_step"):
        if out[key] is not None:
            out[key] = out[key] / US
    out["sample_times"] = [t / US for t in cfg.sample_times]
    if out["blockade_cutoff"] is not None:
        out["blockade_cutoff"] = out["blockade_cutoff"] / MHZ
    return out


@dataclass(frozen=True)
class SimulationConfig:
    """A scenario with its integrator settings and optional plateau window (s)."""

    scenario: Scenario
    integrator: IntegratorConfig
    plateau: Optional[tuple[float, float]] = None
    plateau_label: Optional[str] = None


def simulation_from_dict(doc: Any) -> SimulationConfig:
    """Build a simulate config: a scenario document plus optional integrator and plateau."""
    doc = _check_keys(doc, SIMULATE_KEYS, "")
    scenario = scenario_from_dict({k: v for k, v in doc.items() if k in SCENARIO_KEYS})
    integrator = integrator_from_dict(doc.get("integrator"))
    window = label = None
    if doc.get("plateau") is not None:
        p = _check_keys(doc["plateau"], {"window", "label"}, "plateau", ("window",))
        start, stop = (float(x) * US for x in p["window"])
        window, label = (start, stop), p.get("label")
    return SimulationConfig(scenario=scenario, integrator=integrator, plateau=window, plateau_label=label)


def simulation_to_dict(config: SimulationConfig) -> dict[str, Any]:
    """Dump a simulate config in config units."""
    doc = scenario_to_dict(config.scenario)
    doc["integrator"] = integrator_to_dict(config.integrator)
    if config.plateau is not None:
        doc["plateau"] = {"window": [t / US for t in config.plateau]}
        if config.plateau_label:
            doc["plateau"]["label"] = config.plateau_label
    return doc


def locate(text: str, field: Optional[str]) -> Optional[int]:
    """Find the line of a dotted field path in JSON source text (best effort)."""
    if not field:
        return None
    pos, found = 0, False
    for part in field.split("."):
        if part.isdigit():
            continue
        idx = text.find(f'"{part}"', pos)
        if idx >= 0:
            pos, found = idx, True
    return text.count("\n", 0, pos) + 1 if found else None


def load_document(path: str | Path, parse: Callable[[Any], T]) -> T:
    """Read a JSON file and parse it, attaching line numbers to ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    try:
        return parse(doc)
    except ConfigError as exc:
        if exc.line is not None:
            raise
        raise ConfigError(exc.message, field=exc.field, line=locate(text, exc.field)) from exc
