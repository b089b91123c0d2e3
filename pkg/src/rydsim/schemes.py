"""Named parameter sets and scenario builders for the antiblockade gate schemes.

Scheme 1 drives the control with Ωm = 2√3Ω2 (cyclic Rabi plus Raman), scheme
2 with a strong Ωm ≫ 2Ω2, and scheme 3 adds the periodic target detuning
Δ0 + Δ̄cos(ω̄t) on top of scheme 2. The control modulation always satisfies
the antiblockade condition ω = V.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from rydsim.gates import GateKind, GateTarget
from rydsim.operators import LevelScheme, StateVector
from rydsim.system import (
    DDFSpec,
    DopplerSpec,
    DriveSpec,
    InteractionSpec,
    NoiseSpec,
    Scenario,
    TwoPhotonReduction,
    superatom_layout,
    vdw_strength,
)

MHZ = 2.0 * math.pi * 1e6
"""rad/s per MHz of f = ω/2π."""
US = 1e-6
"""Seconds per µs."""

LZS_DELTA_BAR = 6.0
LZS_DELTA0 = 5.0
LZS_OMEGA_BAR = 0.5
"""LZS detuning parameters in units of Ω2."""

LZS_PLATEAU = (3.5, 4.5)
"""Plateau window in units of 2π/Ω2."""

FIG2_AMPLITUDES = {"00": math.sqrt(0.4), "01": math.sqrt(0.3), "10": math.sqrt(0.2), "11": math.sqrt(0.1)}


class Scheme(enum.IntEnum):
    """Gate schemes by control drive."""

    RAMAN = 1
    STRONG = 2
    LZS = 3


@dataclass(frozen=True)
class ParameterSet:
    """Interaction and drive strengths shared by the gate schemes (rad/s, µm)."""

    name: str
    v: float
    omega_m: float
    omega_2: float
    c6: Optional[float] = None
    distance: Optional[float] = None
    description: str = ""

    @classmethod
    def from_geometry(
        cls, name: str, c6: float, distance: float, omega_m: float, omega_2: float, description: str = ""
    ) -> ParameterSet:
        return cls(
            name=name,
            v=vdw_strength(c6, distance),
            omega_m=omega_m,
            omega_2=omega_2,
            c6=c6,
            distance=distance,
            description=description,
        )


PARAMETER_SETS: dict[str, ParameterSet] = {
    p.name: p
    for p in (
        ParameterSet(
            name="ratio",
            v=500 * 0.1 * MHZ,
            omega_m=100 * 0.1 * MHZ,
            omega_2=0.1 * MHZ,
            description="V = ω = 500Ω2, Ωm = 100Ω2, Ω2/2π = 0.1 MHz",
        ),
        ParameterSet.from_geometry(
            "n70",
            c6=858.4e3 * MHZ,
            distance=4.8,
            omega_m=10 * MHZ,
            omega_2=0.1 * MHZ,
            description="70S: C6/2π = 858.4 GHz·µm⁶ at 4.8 µm (V/2π ≈ 70.18 MHz)",
        ),
        ParameterSet.from_geometry(
            "n100",
            c6=56.2e6 * MHZ,
            distance=9.6,
            omega_m=10 * MHZ,
            omega_2=0.1 * MHZ,
            description="100S: C6/2π = 56.2 THz·µm⁶ at 9.6 µm (V/2π ≈ 71.79 MHz)",
        ),
        ParameterSet(
            name="fast-1mhz",
            v=467 * MHZ,
            omega_m=80 * MHZ,
            omega_2=1 * MHZ,
            description="V/2π = 467 MHz, Ωm/2π = 80 MHz, Ω2/2π = 1 MHz",
        ),
        ParameterSet(
            name="fast-5mhz",
            v=467 * MHZ,
            omega_m=80 * MHZ,
            omega_2=5 * MHZ,
            description="V/2π = 467 MHz, Ωm/2π = 80 MHz, Ω2/2π = 5 MHz",
        ),
    )
}

BLOCKADE_V = 467 * MHZ
BLOCKADE_RABI = 10 * MHZ


def parameter_set(name: str | ParameterSet) -> ParameterSet:
    """Look up a named parameter set; instances pass through."""
    if isinstance(name, ParameterSet):
        return name
    try:
        return PARAMETER_SETS[name]
    except KeyError:
        raise ValueError(f"unknown parameter set {name!r}; known: {sorted(PARAMETER_SETS)}") from None


def control_rabi(scheme: Scheme | int, pset: ParameterSet) -> float:
    """Get Ωm: 2√3Ω2 for scheme 1, the set's strong drive otherwise."""
    return 2.0 * math.sqrt(3.0) * pset.omega_2 if Scheme(scheme) is Scheme.RAMAN else pset.omega_m


def gate_time(scheme: Scheme | int, omega_2: float) -> float:
    """Get the nominal gate time: 2π/Ω2 for schemes 1-2, 8π/Ω2 for the LZS scheme."""
    periods = 4.0 if Scheme(scheme) is Scheme.LZS else 1.0
    return periods * 2.0 * math.pi / omega_2


def plateau_window(omega_2: float) -> tuple[float, float]:
    """Get the LZS plateau window in seconds."""
    period = 2.0 * math.pi / omega_2
    return (LZS_PLATEAU[0] * period, LZS_PLATEAU[1] * period)


@dataclass(frozen=True, kw_only=True)
class Perturbation:
    """Relative errors δX/X on gate time, target Rabi frequency and interaction strength."""

    gate_time: float = 0.0
    omega_2: float = 0.0
    v: float = 0.0

    @classmethod
    def of(cls, parameter: str, value: float) -> Perturbation:
        aliases = {"T": "gate_time", "gate_time": "gate_time", "omega_2": "omega_2", "rabi": "omega_2", "V": "v", "v": "v", "rri": "v"}
        if parameter not in aliases:
            raise ValueError(f"cannot perturb {parameter!r}")
        return cls(**{aliases[parameter]: value})


@dataclass(frozen=True, kw_only=True)
class NoiseDraw:
    """One realization of the noise sources; None disables a source."""

    tau: Optional[float] = None
    ddf_distance: Optional[float] = None
    ddf_sigma: Optional[float] = None
    doppler_shifts: Sequence[float] = ()
    doppler: Optional[DopplerSpec] = None
    stark: Optional[TwoPhotonReduction] = None


def sample_distance(rng: np.random.Generator, mean: float, sigma: float) -> float:
    """Draw d ~ N(mean, σ), redrawing nonpositive values."""
    while True:
        d = float(rng.normal(mean, sigma))
        if d > 0:
            return d


def target_drive(
    scheme: Scheme | int, atom: int, omega_2: float, *, lzs_units: Optional[float] = None, **kwargs: object
) -> DriveSpec:
    """Build the target drive; the LZS detuning is scaled by the nominal Ω2 (lzs_units)."""
    if Scheme(scheme) is Scheme.LZS:
        unit = omega_2 if lzs_units is None else lzs_units
        return DriveSpec.frequency_modulated(
            atom,
            omega_2,
            delta0=LZS_DELTA0 * unit,
            delta_bar=LZS_DELTA_BAR * unit,
            omega_bar=LZS_OMEGA_BAR * unit,
            **kwargs,
        )
    return DriveSpec.constant(atom, omega_2, **kwargs)


def _levels(n: int, leak: bool) -> tuple[LevelScheme, ...]:
    return tuple(LevelScheme.with_leak() if leak else LevelScheme() for _ in range(n))


def _shift(draw: NoiseDraw, atom: int) -> float:
    return float(draw.doppler_shifts[atom]) if atom < len(draw.doppler_shifts) else 0.0


def two_qubit_scenario(
    scheme: Scheme | int,
    pset: str | ParameterSet = "ratio",
    *,
    perturbation: Optional[Perturbation] = None,
    noise: Optional[NoiseDraw] = None,
    t_final: Optional[float] = None,
    initial: Optional[Mapping[str, complex]] = None,
    name: str = "",
    seed: int = 0,
) -> Scenario:
    """Build the two-atom CZ scenario of a scheme.

    Args:
        scheme: 1, 2 or 3.
        pset: Parameter set or its name.
        perturbation: Relative parameter errors; the drive modulation stays at
            the nominal V.
        noise: Decay lifetime, sampled distance, Doppler shifts and Stark
            shifts of this run.
        t_final: Run length; defaults to the (perturbed) nominal gate time.
        initial: Computational amplitudes; defaults to
            √0.4|00⟩+√0.3|01⟩+√0.2|10⟩+√0.1|11⟩.
        name: Label carried into outputs.
        seed: Seed echoed by the scenario.

    Returns:
        The scenario, scored at the nominal gate time.
    """
    scheme = Scheme(scheme)
    p = parameter_set(pset)
    pert = perturbation or Perturbation()
    draw = noise or NoiseDraw()
    stark = draw.stark
    omega_2 = p.omega_2 * (1.0 + pert.omega_2)
    control = DriveSpec.amplitude_modulated(
        0,
        control_rabi(scheme, p),
        p.v,
        doppler_shift=_shift(draw, 0),
        stark=stark.control_stark if stark else None,
    )
    target = target_drive(
        scheme,
        1,
        omega_2,
        lzs_units=p.omega_2,
        doppler_shift=_shift(draw, 1),
        stark=stark.target_stark if stark else None,
    )
    ddf = None
    if draw.ddf_distance is not None:
        if p.c6 is None or p.distance is None:
            raise ValueError(f"parameter set {p.name!r} has no geometry for distance disorder")
        ddf = DDFSpec(c6=p.c6, d_ideal=p.distance, d_actual=draw.ddf_distance)
    interactions = InteractionSpec.explicit({(0, 1): p.v * (1.0 + pert.v)}, ddf=ddf)
    schemes = _levels(2, draw.tau is not None)
    t_gate = gate_time(scheme, p.omega_2) * (1.0 + pert.gate_time)
    return Scenario(
        schemes=schemes,
        drives=(control, target),
        interactions=interactions,
        initial_state=StateVector.from_computational(initial or FIG2_AMPLITUDES, schemes, normalize=True),
        t_final=t_final or t_gate,
        gate_time=t_gate,
        target=GateTarget.cz(),
        noise=NoiseSpec(tau=draw.tau, ddf_sigma=draw.ddf_sigma, doppler=draw.doppler),
        rng_seed=seed,
        name=name or f"scheme{int(scheme)}-{p.name}",
    )


def multiqubit_scenario(
    n: int,
    scheme: Scheme | int,
    pset: str | ParameterSet = "ratio",
    *,
    t_final: Optional[float] = None,
    name: str = "",
) -> Scenario:
    """Build the three- or four-qubit phase gate: n−1 modulated controls and one target.

    Three atoms use V13 = V23 = V′ = V; four atoms use V14 = V24 = V34 = V with
    V12 = 100V, V13 = 200V, V23 = 500V. The input is the uniform superposition.
    """
    scheme = Scheme(scheme)
    p = parameter_set(pset)
    if n == 3:
        pairs = {(0, 2): p.v, (1, 2): p.v, (0, 1): p.v}
    elif n == 4:
        pairs = {(0, 3): p.v, (1, 3): p.v, (2, 3): p.v, (0, 1): 100 * p.v, (0, 2): 200 * p.v, (1, 2): 500 * p.v}
    else:
        raise ValueError(f"multiqubit presets cover 3 or 4 atoms, got {n}")
    controls = tuple(DriveSpec.amplitude_modulated(j, control_rabi(scheme, p), p.v) for j in range(n - 1))
    schemes = _levels(n, False)
    t_gate = gate_time(scheme, p.omega_2)
    return Scenario(
        schemes=schemes,
        drives=(*controls, target_drive(scheme, n - 1, p.omega_2)),
        interactions=InteractionSpec.explicit(pairs),
        initial_state=StateVector.uniform_computational(schemes),
        t_final=t_final or t_gate,
        gate_time=t_gate,
        target=GateTarget.phase(n),
        name=name or f"{n}q-scheme{int(scheme)}-{p.name}",
    )


def superatom_scenario(
    radius: float,
    pset: str | ParameterSet = "n100",
    *,
    scheme: Scheme | int = Scheme.STRONG,
    t_final: float = 10 * US,
    name: str = "",
) -> Scenario:
    """Build the four-atom chain (−R, 0, R, d) with three controls modulated at ω = V(d)."""
    p = parameter_set(pset)
    if p.c6 is None or p.distance is None:
        raise ValueError(f"parameter set {p.name!r} has no geometry")
    interactions = superatom_layout(radius, p.distance, p.c6)
    controls = tuple(DriveSpec.amplitude_modulated(j, control_rabi(scheme, p), p.v) for j in range(3))
    schemes = _levels(4, False)
    return Scenario(
        schemes=schemes,
        drives=(*controls, target_drive(scheme, 3, p.omega_2)),
        interactions=interactions,
        initial_state=StateVector.uniform_computational(schemes),
        t_final=t_final,
        target=GateTarget.phase(4),
        name=name or f"superatom-R{radius * 1e3:.1f}nm",
    )


def blockade_scenario(
    *,
    v: float = BLOCKADE_V,
    rabi: float = BLOCKADE_RABI,
    doppler_shifts: Sequence[float] = (),
    doppler: Optional[DopplerSpec] = None,
    name: str = "blockade-baseline",
    seed: int = 0,
) -> Scenario:
    """Build the resonant π(control)–2π(target)–π(control) blockade gate.

    Pulse lengths are π/Ωr, 2π/Ωr and π/Ωr; the ideal result is
    diag(1, −1, −1, −1) on (00, 01, 10, 11).
    """
    pi_time = math.pi / rabi
    draw = NoiseDraw(doppler_shifts=doppler_shifts)
    control = DriveSpec.constant(
        0, rabi, windows=((0.0, pi_time), (3 * pi_time, 4 * pi_time)), doppler_shift=_shift(draw, 0)
    )
    target = DriveSpec.constant(1, rabi, windows=((pi_time, 3 * pi_time),), doppler_shift=_shift(draw, 1))
    schemes = _levels(2, False)
    return Scenario(
        schemes=schemes,
        drives=(control, target),
        interactions=InteractionSpec.explicit({(0, 1): v}),
        initial_state=StateVector.from_computational(FIG2_AMPLITUDES, schemes, normalize=True),
        t_final=4 * pi_time,
        target=GateTarget(GateKind.BLOCKADE_CZ_TWO_QUBIT, 2),
        noise=NoiseSpec(doppler=doppler),
        rng_seed=seed,
        name=name,
    )

