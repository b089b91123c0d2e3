"""Gate scenarios and assembly of their Hamiltonians and collapse operators.

All frequencies are angular (rad/s), times in seconds, distances in µm and
C6 coefficients in rad/s·µm⁶.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import constants

from rydsim.errors import RegimeWarning
from rydsim.gates import GateTarget
from rydsim.operators import (
    Level,
    LevelScheme,
    Operator,
    StateVector,
    embed,
    pair_projector,
    restrict,
    total_dim,
)

logger = logging.getLogger(__name__)

RB87_MASS = 86.909180527 * constants.atomic_mass
"""kg."""

TWO_PHOTON_MIN_RATIO = 5.0


def window_open(windows: Sequence[tuple[float, float]], t: float) -> bool:
    """Report whether t lies in any half-open window [start, stop); no windows means always."""
    return not windows or any(start <= t < stop for start, stop in windows)


class DriveKind(str, enum.Enum):
    """Time dependence of a drive."""

    CONSTANT = "constant"
    AMPLITUDE_MODULATED = "amplitude_modulated"
    FREQUENCY_MODULATED = "frequency_modulated"


@dataclass(frozen=True)
class StarkShift:
    """Light shifts left over by adiabatic elimination of the intermediate level.

    For amplitude-modulated drives the Rydberg shift is the peak value and is
    multiplied by cos²(ωt).
    """

    ground: float = 0.0
    rydberg: float = 0.0


@dataclass(frozen=True, kw_only=True)
class DriveSpec:
    """Laser coupling |1⟩↔|r⟩ of one atom.

    ``rabi`` is Ω for constant and frequency-modulated drives and the peak Ωm
    for amplitude-modulated ones.
    """

    atom: int
    kind: DriveKind
    rabi: float
    mod_freq: float = 0.0
    delta0: float = 0.0
    delta_bar: float = 0.0
    omega_bar: float = 0.0
    detuning: float = 0.0
    doppler_shift: float = 0.0
    windows: tuple[tuple[float, float], ...] = ()
    stark: Optional[StarkShift] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DriveKind(self.kind))
        object.__setattr__(
            self, "windows", tuple((float(a), float(b)) for a, b in self.windows)
        )
        values = (
            self.rabi,
            self.mod_freq,
            self.delta0,
            self.delta_bar,
            self.omega_bar,
            self.detuning,
            self.doppler_shift,
        )
        if not all(math.isfinite(v) for v in values):
            raise ValueError("drive frequencies must be finite")
        if self.kind is DriveKind.AMPLITUDE_MODULATED and not self.mod_freq > 0:
            raise ValueError("amplitude-modulated drive needs mod_freq > 0")
        if self.kind is DriveKind.FREQUENCY_MODULATED and not self.omega_bar > 0:
            raise ValueError("frequency-modulated drive needs omega_bar > 0")
        for start, stop in self.windows:
            if not stop > start:
                raise ValueError(f"empty drive window ({start}, {stop})")

    @classmethod
    def constant(cls, atom: int, rabi: float, **kwargs: object) -> DriveSpec:
        return cls(atom=atom, kind=DriveKind.CONSTANT, rabi=rabi, **kwargs)  # type: ignore[arg-type]

    @classmethod
    def amplitude_modulated(
        cls, atom: int, omega_max: float, mod_freq: float, **kwargs: object
    ) -> DriveSpec:
        return cls(  # type: ignore[arg-type]
            atom=atom,
            kind=DriveKind.AMPLITUDE_MODULATED,
            rabi=omega_max,
            mod_freq=mod_freq,
            **kwargs,
        )

    @classmethod
    def frequency_modulated(
        cls,
        atom: int,
        rabi: float,
        delta0: float,
        delta_bar: float,
        omega_bar: float,
        **kwargs: object,
    ) -> DriveSpec:
        return cls(  # type: ignore[arg-type]
            atom=atom,
            kind=DriveKind.FREQUENCY_MODULATED,
            rabi=rabi,
            delta0=delta0,
            delta_bar=delta_bar,
            omega_bar=omega_bar,
            **kwargs,
        )

    @property
    def omega_max(self) -> float:
        return self.rabi

    def is_on(self, t: float) -> bool:
        """Report whether t lies in a drive window; windows are half-open [start, stop)."""
        return window_open(self.windows, t)

    def amplitude(self, t: float) -> float:
        """Get the real Rabi amplitude Ω(t), zero outside the drive windows."""
        return self.envelope(t) if self.is_on(t) else 0.0

    def envelope(self, t: float) -> float:
        """Get Ω(t) ignoring the drive windows."""
        if self.kind is DriveKind.AMPLITUDE_MODULATED:
            return self.rabi * math.cos(self.mod_freq * t)
        return self.rabi

    def coupling(self, t: float) -> complex:
        """Get the coefficient Ω(t)e^{iδt}/2 of |1⟩⟨r|, zero outside the drive windows."""
        return self.carrier(t) if self.is_on(t) else 0j

    def carrier(self, t: float) -> complex:
        """Get Ω(t)e^{iδt}/2 ignoring the drive windows."""
        amp = 0.5 * self.envelope(t)
        if self.doppler_shift == 0.0:
            return complex(amp)
        return amp * complex(math.cos(self.doppler_shift * t), math.sin(self.doppler_shift * t))

    def modulated_detuning(self, t: float) -> float:
        """Get the time-dependent part of the |r⟩ energy (frequency modulation)."""
        return self.delta0 + self.delta_bar * math.cos(self.omega_bar * t)

    def stark_rydberg(self, t: float) -> float:
        assert self.stark is not None
        return self.stark.rydberg * math.cos(self.mod_freq * t) ** 2

    def frequency_scales(self) -> list[float]:
        """List the rates this drive puts into the Hamiltonian."""
        scales = [abs(self.rabi), abs(self.detuning), abs(self.doppler_shift)]
        if self.kind is DriveKind.AMPLITUDE_MODULATED:
            scales.append(self.mod_freq)
        if self.kind is DriveKind.FREQUENCY_MODULATED:
            scales += [abs(self.delta0) + abs(self.delta_bar), self.omega_bar]
        if self.stark is not None:
            scales += [abs(self.stark.ground), abs(self.stark.rydberg), 2 * self.mod_freq]
        return scales


@dataclass(frozen=True)
class DDFSpec:
    """Static distance disorder on one pair: the linearized RRI gradient term."""

    c6: float
    d_ideal: float
    d_actual: float
    pair: tuple[int, int] = (0, 1)


@dataclass(frozen=True)
class InteractionSpec:
    """Pairwise Rydberg-Rydberg interaction strengths V_ij (rad/s), symmetric in (i, j)."""

    pairs: tuple[tuple[tuple[int, int], float], ...] = ()
    c6: Optional[float] = None
    positions: Optional[tuple[tuple[float, ...], ...]] = None
    ddf: Optional[DDFSpec] = None

    def __post_init__(self) -> None:
        merged: dict[tuple[int, int], float] = {}
        for (i, j), v in self.pairs:
            if i == j:
                raise ValueError(f"self-interaction on atom {i}")
            key = (min(i, j), max(i, j))
            if key in merged and merged[key] != v:
                raise ValueError(f"conflicting strengths for pair {key}")
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"interaction strength for {key} must be finite and >= 0")
            merged[key] = float(v)
        object.__setattr__(self, "pairs", tuple(sorted(merged.items())))

    @classmethod
    def explicit(
        cls, pairs: Mapping[tuple[int, int], float], ddf: Optional[DDFSpec] = None
    ) -> InteractionSpec:
        return cls(pairs=tuple(pairs.items()), ddf=ddf)

    @classmethod
    def from_geometry(
        cls,
        c6: float,
        positions: Sequence[Sequence[float]],
        ddf: Optional[DDFSpec] = None,
    ) -> InteractionSpec:
        """Derive V_ij = C6/d_ij⁶ from atom positions in µm."""
        pts = tuple(tuple(float(x) for x in p) for p in positions)
        pairs = {}
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = math.dist(pts[i], pts[j])
                pairs[(i, j)] = vdw_strength(c6, d)
        return cls(pairs=tuple(pairs.items()), c6=c6, positions=pts, ddf=ddf)

    def strength(self, i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        return dict(self.pairs).get(key, 0.0)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(self.pairs)

    def scaled(self, factor: float) -> InteractionSpec:
        """Scale every V_ij by a common factor (relative-error sweeps); geometry is dropped."""
        return replace(
            self,
            pairs=tuple((k, v * factor) for k, v in self.pairs),
            c6=None,
            positions=None,
        )


@dataclass(frozen=True)
class DopplerSpec:
    """Thermal motion: temperature (K), effective wave number (1/m) and atomic mass (kg)."""

    temperature: float
    k_eff: float = 8.76e6
    mass: float = RB87_MASS

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @property
    def sigma_delta(self) -> float:
        """Get the detuning spread k_eff·√(k_B T/m) in rad/s."""
        return doppler_sigma(self.temperature, self.k_eff, self.mass)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise sources of a scenario; None means the source is off."""

    tau: Optional[float] = None
    ddf_sigma: Optional[float] = None
    doppler: Optional[DopplerSpec] = None

    def __post_init__(self) -> None:
        if self.tau is not None and not self.tau > 0:
            raise ValueError("lifetime tau must be positive")
        if self.ddf_sigma is not None and self.ddf_sigma < 0:
            raise ValueError("ddf sigma must be >= 0")

    @property
    def is_quiet(self) -> bool:
        return self.tau is None and not self.ddf_sigma and self.doppler is None


@dataclass(frozen=True, kw_only=True)
class Scenario:
    """Complete description of an N-atom gate run."""

    schemes: tuple[LevelScheme, ...]
    drives: tuple[DriveSpec, ...]
    interactions: InteractionSpec
    initial_state: StateVector
    t_final: float
    target: GateTarget
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    rng_seed: int = 0
    name: str = ""
    gate_time: Optional[float] = None

    def __post_init__(self) -> None:
        n = len(self.schemes)
        if n < 1:
            raise ValueError("scenario needs at least one atom")
        for drive in self.drives:
            if not 0 <= drive.atom < n:
                raise ValueError(f"drive references atom {drive.atom} of {n}")
        for i, j in self.interactions.as_dict():
            if j >= n:
                raise ValueError(f"interaction pair ({i}, {j}) references a missing atom")
        if self.initial_state.dim != total_dim(self.schemes):
            raise ValueError(
                f"initial state dimension {self.initial_state.dim} does not match "
                f"{total_dim(self.schemes)}"
            )
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.gate_time is not None and not 0 < self.gate_time <= self.t_final * (1 + 1e-12):
            raise ValueError(f"gate_time {self.gate_time} outside (0, t_final]")
        if self.target.n_qubits != n:
            raise ValueError(f"gate target acts on {self.target.n_qubits} qubits, scenario has {n}")

    @property
    def n_atoms(self) -> int:
        return len(self.schemes)

    @property
    def dim(self) -> int:
        return total_dim(self.schemes)

    @property
    def evaluation_time(self) -> float:
        """Get the time at which the gate is scored: gate_time, else t_final."""
        return self.t_final if self.gate_time is None else self.gate_time

    def with_changes(self, **changes: object) -> Scenario:
        return replace(self, **changes)  # type: ignore[arg-type]


@dataclass(frozen=True)
class TwoPhotonInputs:
    """Single-photon Rabi frequencies and intermediate detunings of the two-photon ladders."""

    omega_1p: float
    omega_m_tilde: float
    delta_1: float
    omega_2p: float
    omega_2r: float
    delta_2: float
    include_stark: bool = False


@dataclass(frozen=True)
class TwoPhotonReduction:
    """Effective single-photon Rabi frequencies and the Stark shifts left behind."""

    omega_m: float
    omega_2: float
    control_stark: Optional[StarkShift] = None
    target_stark: Optional[StarkShift] = None

    @property
    def stark_terms(self) -> Optional[tuple[float, float, float, float]]:
        """Get (Ω1p²/4Δ1, Ω̃m²/4Δ1, Ω2p²/4Δ2, Ω2r²/4Δ2), or None when shifts are off."""
        if self.control_stark is None or self.target_stark is None:
            return None
        return (
            self.control_stark.ground,
            self.control_stark.rydberg,
            self.target_stark.ground,
            self.target_stark.rydberg,
        )


def vdw_strength(c6: float, d: float) -> float:
    """Get the van der Waals strength V = C6/d⁶."""
    if not d > 0:
        raise ValueError(f"interatomic distance must be positive, got {d}")
    return c6 / d**6


def vdw_gradient(c6: float, d: float) -> float:
    """Get ∂V/∂d = −6·C6/d⁷."""
    if not d > 0:
        raise ValueError(f"interatomic distance must be positive, got {d}")
    return -6.0 * c6 / d**7


def ddf_term(
    c6: float,
    d_ideal: float,
    d: float,
    atoms: tuple[int, int],
    schemes: Sequence[LevelScheme],
) -> Operator:
    """Build the linearized dipole-dipole-force term ∂V/∂d|_{d_i}(d−d_i)|rr⟩⟨rr|."""
    coefficient = vdw_gradient(c6, d_ideal) * (d - d_ideal)
    return coefficient * pair_projector(Level.RYD, Level.RYD, atoms, schemes)


def doppler_sigma(temperature: float, k_eff: float, mass: float = RB87_MASS) -> float:
    """Get σ_δ = k_eff·√(k_B·T/m) in rad/s."""
    return k_eff * math.sqrt(constants.k * temperature / mass)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Time-dependent Hamiltonian H(t) = H_static + Σ_k [c_k(t)A_k + H.c.] + Σ_m d_m(t)D_m.

    Coupling coefficients c_k are complex, diagonal coefficients d_m real, so
    H(t) is Hermitian at every t by construction.
    """

    static: Operator
    coupling_ops: tuple[Operator, ...] = ()
    coupling_coeffs: tuple[Callable[[float], complex], ...] = ()
    diagonal_ops: tuple[Operator, ...] = ()
    diagonal_coeffs: tuple[Callable[[float], float], ...] = ()
    breakpoints: tuple[float, ...] = ()
    drive_scales: tuple[float, ...] = ()
    coupling_windows: tuple[tuple[tuple[float, float], ...], ...] = ()

    def __post_init__(self) -> None:
        d = self.static.shape[0]
        a = np.asarray(self.coupling_ops, dtype=complex).reshape(-1, d, d)
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_a_dag", np.conj(np.swapaxes(a, 1, 2)))
        object.__setattr__(
            self, "_d", np.asarray(self.diagonal_ops, dtype=complex).reshape(-1, d, d)
        )

    @property
    def dim(self) -> int:
        return int(self.static.shape[0])

    def __call__(self, t: float) -> Operator:
        h = self.static.copy()
        if self.coupling_coeffs:
            c = np.fromiter((f(t) for f in self.coupling_coeffs), dtype=complex)
            if self.coupling_windows:
                c *= [window_open(w, t) for w in self.coupling_windows]
            h += np.tensordot(c, self._a, axes=1) + np.tensordot(c.conj(), self._a_dag, axes=1)
        if self.diagonal_coeffs:
            dv = np.fromiter((f(t) for f in self.diagonal_coeffs), dtype=float)
            h += np.tensordot(dv, self._d, axes=1)
        return h

    def on_segment(self, start: float, stop: float) -> Hamiltonian:
        """Fix every windowed coupling on or off for the closed interval [start, stop].

        The interval must not contain a window edge in its interior. Couplings
        that are off are dropped; the result carries no windows.
        """
        if not self.coupling_windows:
            return self
        mid = 0.5 * (start + stop)
        active = [k for k, w in enumerate(self.coupling_windows) if window_open(w, mid)]
        return replace(
            self,
            coupling_ops=tuple(self.coupling_ops[k] for k in active),
            coupling_coeffs=tuple(self.coupling_coeffs[k] for k in active),
            coupling_windows=(),
        )

    def restrict(self, indices: npt.ArrayLike) -> Hamiltonian:
        """Project onto the basis states listed in indices."""
        idx = np.asarray(indices, dtype=int)
        return replace(
            self,
            static=restrict(self.static, idx),
            coupling_ops=tuple(restrict(a, idx) for a in self.coupling_ops),
            diagonal_ops=tuple(restrict(m, idx) for m in self.diagonal_ops),
        )

    def frequency_scale(self) -> float:
        """Get f_max: the largest static energy, coupling or modulation rate (rad/s)."""
        static = float(np.max(np.abs(self.static), initial=0.0))
        return max([static, *self.drive_scales], default=0.0)


def assemble_hamiltonian(scenario: Scenario) -> Hamiltonian:
    """Build H(t) of a scenario.

    The result is Σ_j (Ω_j(t)e^{iδ_j t}/2)|1⟩_j⟨r| + H.c. + Σ_j Δ_j(t)|r⟩_j⟨r|
    + Σ_{i<j} V_ij|rr⟩_ij⟨rr| + the optional dipole-dipole-force term and
    Stark shifts.
    """
    schemes = scenario.schemes
    dim = total_dim(schemes)
    static = np.zeros((dim, dim), dtype=complex)
    couplings: list[Operator] = []
    coupling_coeffs: list[Callable[[float], complex]] = []
    coupling_windows: list[tuple[tuple[float, float], ...]] = []
    diagonals: list[Operator] = []
    diagonal_coeffs: list[Callable[[float], float]] = []
    breakpoints: set[float] = set()
    scales: list[float] = []

    for drive in scenario.drives:
        scheme = schemes[drive.atom]
        rydberg = embed(scheme.transition(Level.RYD, Level.RYD), drive.atom, schemes)
        couplings.append(embed(scheme.transition(Level.G1, Level.RYD), drive.atom, schemes))
        coupling_coeffs.append(drive.carrier)
        coupling_windows.append(drive.windows)
        if drive.kind is DriveKind.FREQUENCY_MODULATED:
            diagonals.append(rydberg)
            diagonal_coeffs.append(drive.modulated_detuning)
        if drive.detuning:
            static += drive.detuning * rydberg
        if drive.stark is not None:
            ground = embed(scheme.transition(Level.G1, Level.G1), drive.atom, schemes)
            static += drive.stark.ground * ground
            if drive.kind is DriveKind.AMPLITUDE_MODULATED:
                diagonals.append(rydberg)
                diagonal_coeffs.append(drive.stark_rydberg)
            else:
                static += drive.stark.rydberg * rydberg
        for window in drive.windows:
            breakpoints.update(w for w in window if 0 < w < scenario.t_final)
        scales.extend(drive.frequency_scales())

    for (i, j), strength in scenario.interactions.pairs:
        if strength:
            static += strength * pair_projector(Level.RYD, Level.RYD, (i, j), schemes)

    ddf = scenario.interactions.ddf
    if ddf is not None:
        static += ddf_term(ddf.c6, ddf.d_ideal, ddf.d_actual, ddf.pair, schemes)

    return Hamiltonian(
        static=static,
        coupling_ops=tuple(couplings),
        coupling_coeffs=tuple(coupling_coeffs),
        diagonal_ops=tuple(diagonals),
        diagonal_coeffs=tuple(diagonal_coeffs),
        breakpoints=tuple(sorted(breakpoints)),
        drive_scales=tuple(scales),
        coupling_windows=tuple(coupling_windows) if any(coupling_windows) else (),
    )


def collapse_rates(tau: float) -> dict[Level, float]:
    """Get decay rates out of |r⟩: γ0 = γ1 = 1/(8τ), γ_leak = 3/(4τ)."""
    return {Level.G0: 1.0 / (8.0 * tau), Level.G1: 1.0 / (8.0 * tau), Level.LEAK: 3.0 / (4.0 * tau)}


def assemble_collapse_ops(scenario: Scenario) -> list[Operator]:
    """Build √γ_k|k⟩_j⟨r| for every atom j and k ∈ (g0, g1, leak).

    Returns an empty list when decay is off. τ = inf yields zero operators.
    """
    tau = scenario.noise.tau
    if tau is None:
        return []
    ops = []
    for j, scheme in enumerate(scenario.schemes):
        if not scheme.has_leak:
            raise ValueError(f"decay requested but atom {j} has no leak level")
        for level, rate in collapse_rates(tau).items():
            ops.append(math.sqrt(rate) * embed(scheme.transition(level, Level.RYD), j, scenario.schemes))
    return ops


def reduce_two_photon(inp: TwoPhotonInputs) -> TwoPhotonReduction:
    """Eliminate the intermediate level: Ωm = Ω̃mΩ1p/2Δ1, Ω2 = Ω2rΩ2p/2Δ2."""
    ratios = (
        abs(inp.delta_1) / max(abs(inp.omega_1p), abs(inp.omega_m_tilde), 1e-300),
        abs(inp.delta_2) / max(abs(inp.omega_2p), abs(inp.omega_2r), 1e-300),
    )
    if min(ratios) < TWO_PHOTON_MIN_RATIO:
        message = (
            f"intermediate detuning only {min(ratios):.2f}x the Rabi frequencies; "
            "adiabatic elimination is unreliable"
        )
        logger.warning(message)
        warnings.warn(message, RegimeWarning, stacklevel=2)
    omega_m = inp.omega_m_tilde * inp.omega_1p / (2.0 * inp.delta_1)
    omega_2 = inp.omega_2r * inp.omega_2p / (2.0 * inp.delta_2)
    if not inp.include_stark:
        return TwoPhotonReduction(omega_m=omega_m, omega_2=omega_2)
    return TwoPhotonReduction(
        omega_m=omega_m,
        omega_2=omega_2,
        control_stark=StarkShift(
            ground=inp.omega_1p**2 / (4.0 * inp.delta_1),
            rydberg=inp.omega_m_tilde**2 / (4.0 * inp.delta_1),
        ),
        target_stark=StarkShift(
            ground=inp.omega_2p**2 / (4.0 * inp.delta_2),
            rydberg=inp.omega_2r**2 / (4.0 * inp.delta_2),
        ),
    )


def superatom_layout(radius: float, d_target: float, c6: float) -> InteractionSpec:
    """Place three control atoms at (−R, 0, +R) and the target at d_target on a line (µm)."""
    if not 0 < radius < d_target:
        raise ValueError(f"need 0 < R < d_target, got R={radius}, d_target={d_target}")
    return InteractionSpec.from_geometry(c6, positions_1d((-radius, 0.0, radius, d_target)))


def blockade_subspace(
    scenario_or_hamiltonian: Scenario | Hamiltonian, cutoff: Optional[float]
) -> npt.NDArray[np.int_]:
    """Get indices of basis states whose static energy magnitude is at most cutoff."""
    h = (
        assemble_hamiltonian(scenario_or_hamiltonian)
        if isinstance(scenario_or_hamiltonian, Scenario)
        else scenario_or_hamiltonian
    )
    energies = np.abs(np.real(np.diag(h.static)))
    if cutoff is None:
        return np.arange(h.dim)
    keep = np.flatnonzero(energies <= cutoff)
    if keep.size < h.dim:
        logger.debug("blockade cutoff %.3e rad/s removes %d of %d states", cutoff, h.dim - keep.size, h.dim)
    return keep


def frequency_scale(hamiltonian: Hamiltonian) -> float:
    """Get the fastest angular frequency the integrator must resolve."""
    return hamiltonian.frequency_scale()


def positions_1d(xs: Iterable[float]) -> tuple[tuple[float, ...], ...]:
    """Place atoms on a line (µm)."""
    return tuple((float(x),) for x in xs)
