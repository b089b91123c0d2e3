"""Gate targets, fidelities, phases and the per-run gate report."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd

from rydsim.errors import UndefinedPhaseError
from rydsim.operators import (
    DensityMatrix,
    LevelScheme,
    Operator,
    StateVector,
    computational_indices,
    computational_labels,
    total_dim,
)

PHASE_AMPLITUDE_FLOOR = 1e-6
MAX_QUBITS = 5


class GateKind(str, enum.Enum):
    """Supported gate targets."""

    CZ_TWO_QUBIT = "cz_two_qubit"
    PHASE_N_QUBIT = "phase_n_qubit"
    BLOCKADE_CZ_TWO_QUBIT = "blockade_cz_two_qubit"


@dataclass(frozen=True)
class GateTarget:
    """Diagonal ±1 gate on the computational subspace of every atom's {g0, g1}."""

    kind: GateKind
    n_qubits: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        target_unitary(self.kind, self.n_qubits)

    @classmethod
    def cz(cls) -> GateTarget:
        return cls(GateKind.CZ_TWO_QUBIT, 2)

    @classmethod
    def phase(cls, n: int) -> GateTarget:
        return cls(GateKind.PHASE_N_QUBIT, n)

    @property
    def flipped_label(self) -> str:
        """Get the computational state that acquires the π phase (|0…01⟩)."""
        return "0" * (self.n_qubits - 1) + "1"

    def unitary(self) -> Operator:
        return target_unitary(self.kind, self.n_qubits)

    def diagonal(self) -> npt.NDArray[np.float64]:
        return np.real(np.diag(self.unitary()))


def target_unitary(kind: GateKind | str, n: int) -> Operator:
    """Get the 2ⁿ×2ⁿ diagonal ±1 target.

    ``cz_two_qubit`` and ``phase_n_qubit`` flip the sign of |0…01⟩ only;
    ``blockade_cz_two_qubit`` is diag(1, −1, −1, −1), which equals the CZ
    target up to a Z on the control atom.
    """
    kind = GateKind(kind)
    if not 2 <= n <= MAX_QUBITS:
        raise ValueError(f"unsupported qubit count {n}")
    if kind is not GateKind.PHASE_N_QUBIT and n != 2:
        raise ValueError(f"{kind.value} acts on exactly 2 qubits, got {n}")
    diag = np.ones(2**n)
    if kind is GateKind.BLOCKADE_CZ_TWO_QUBIT:
        diag[1:] = -1.0
    else:
        diag[1] = -1.0  # |0…01⟩ is the second basis state
    return np.diag(diag).astype(complex)


def embed_target(target: GateTarget, schemes: Sequence[LevelScheme]) -> npt.NDArray[np.complex128]:
    """Get the diagonal of the target lifted to the full space, identity outside the computational subspace."""
    diag = np.ones(total_dim(schemes), dtype=complex)
    index = computational_indices(schemes)
    for bits, value in zip(computational_labels(len(schemes)), target.diagonal()):
        diag[index[bits]] = value
    return diag


def ideal_output(psi0: StateVector, target: GateTarget, schemes: Sequence[LevelScheme]) -> StateVector:
    """Get U ψ0."""
    return StateVector(embed_target(target, schemes) * psi0.amplitudes)


def fidelity_pure(
    psi_t: StateVector | npt.ArrayLike,
    psi0: StateVector,
    target: GateTarget,
    schemes: Sequence[LevelScheme],
) -> float:
    """Get F = |⟨Ψ(t)|U|ψ0⟩|."""
    amps = psi_t.amplitudes if isinstance(psi_t, StateVector) else np.asarray(psi_t)
    tgt = embed_target(target, schemes) * psi0.amplitudes
    return float(abs(np.vdot(amps, tgt)))


def fidelity_mixed(
    rho_t: DensityMatrix | npt.ArrayLike,
    psi0: StateVector,
    target: GateTarget,
    schemes: Sequence[LevelScheme],
) -> float:
    """Get F = √⟨ψ_tgt|ρ(t)|ψ_tgt⟩ with ψ_tgt = Uψ0."""
    rho = rho_t.entries if isinstance(rho_t, DensityMatrix) else np.asarray(rho_t)
    tgt = embed_target(target, schemes) * psi0.amplitudes
    overlap = float(np.real(np.vdot(tgt, rho @ tgt)))
    return math.sqrt(max(overlap, 0.0))


def phase_of(
    state: StateVector | npt.ArrayLike,
    comp_label: str,
    schemes: Sequence[LevelScheme],
    *,
    strict: bool = False,
) -> float:
    """Get the argument of a computational amplitude, in (−π, π].

    Amplitudes below 1e-6 carry no meaningful phase: NaN is returned, or
    UndefinedPhaseError raised when ``strict``.
    """
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    index = computational_indices(schemes)
    if comp_label not in index:
        raise ValueError(f"{comp_label!r} is not a computational label")
    amp = complex(amps[index[comp_label]])
    if abs(amp) <= PHASE_AMPLITUDE_FLOOR:
        if strict:
            raise UndefinedPhaseError(f"amplitude of |{comp_label}⟩ is {abs(amp):.1e}")
        return math.nan
    phase = math.atan2(amp.imag, amp.real)
    return math.pi if phase <= -math.pi else phase


@dataclass
class PlateauMetrics:
    """Fidelity and flipped-state phase over a time window."""

    window: tuple[float, float]
    min_fidelity: float
    mean_fidelity: float
    max_phase_deviation: float


@dataclass
class GateReport:
    """Fidelity, populations and phases of the computational states over a run."""

    times: npt.NDArray[np.float64]
    fidelity: npt.NDArray[np.float64]
    populations: dict[str, npt.NDArray[np.float64]]
    phases: dict[str, npt.NDArray[np.float64]]
    target: GateTarget
    errors: dict[str, float] = field(default_factory=dict)
    fidelities: dict[str, float] = field(default_factory=dict)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])

    def fidelity_at(self, t: float) -> float:
        """Get F at the sample closest to t."""
        return float(self.fidelity[int(np.argmin(np.abs(self.times - t)))])

    def intrinsic_error_series(self) -> npt.NDArray[np.float64]:
        """Get E_in(t) = 1 − F(t)."""
        return 1.0 - self.fidelity

    def to_frame(self) -> pd.DataFrame:
        """Tabulate as t, F, pop_<label>..., phase_<label>..."""
        columns: dict[str, npt.NDArray[np.float64]] = {"t": self.times, "F": self.fidelity}
        columns |= {f"pop_{k}": v for k, v in self.populations.items()}
        columns |= {f"phase_{k}": v for k, v in self.phases.items()}
        return pd.DataFrame(columns)

    def summary(self) -> dict[str, object]:
        return {
            "target": self.target.kind.value,
            "n_qubits": self.target.n_qubits,
            "t_final": float(self.times[-1]),
            "final_fidelity": self.final_fidelity,
            "errors": dict(self.errors),
            "fidelities": dict(self.fidelities),
        }


def gate_report(
    times: npt.ArrayLike,
    states: npt.ArrayLike,
    psi0: StateVector,
    target: GateTarget,
    schemes: Sequence[LevelScheme],
) -> GateReport:
    """Evaluate F(t), computational populations and phases along a sampled run.

    ``states`` is (n_t, dim) for pure runs or (n_t, dim, dim) for density
    matrices; phases are NaN for the latter.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states)
    index = computational_indices(schemes)
    labels = computational_labels(len(schemes))
    tgt = embed_target(target, schemes) * psi0.amplitudes
    mixed = states.ndim == 3
    if mixed:
        overlaps = np.real(np.einsum("i,tij,j->t", tgt.conj(), states, tgt))
        fidelity = np.sqrt(np.clip(overlaps, 0.0, None))
        populations = {b: np.real(states[:, index[b], index[b]]) for b in labels}
        phases = {b: np.full(times.shape, np.nan) for b in labels}
    else:
        fidelity = np.abs(states.conj() @ tgt)
        populations = {b: np.abs(states[:, index[b]]) ** 2 for b in labels}
        phases = {
            b: np.array([phase_of(s, b, schemes) for s in states]) for b in labels
        }
    return GateReport(
        times=times,
        fidelity=fidelity,
        populations=populations,
        phases=phases,
        target=target,
    )


def plateau_scan(
    report: GateReport, window: tuple[float, float], label: Optional[str] = None
) -> PlateauMetrics:
    """Summarize F and the flipped-state phase (distance from π) over a time window."""
    start, stop = window
    mask = (report.times >= start) & (report.times <= stop)
    if not mask.any():
        raise ValueError(f"no samples inside window {window}")
    label = label or report.target.flipped_label
    phase = report.phases[label][mask]
    deviation = np.abs(np.angle(np.exp(1j * phase) * -1.0))
    return PlateauMetrics(
        window=(float(start), float(stop)),
        min_fidelity=float(report.fidelity[mask].min()),
        mean_fidelity=float(report.fidelity[mask].mean()),
        max_phase_deviation=float(np.nanmax(deviation)) if np.isfinite(deviation).any() else math.nan,
    )


def isolated_error(f_noiseless: float, f_noisy: float) -> float:
    """Get E_x = max(0, F_noiseless − F_with_x)."""
    return max(0.0, f_noiseless - f_noisy)

