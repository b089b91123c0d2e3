"""Analytic reductions of the full gate dynamics.

These are separate constructions checked against full propagation; nothing
here edits an assembled Hamiltonian in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import expm
from scipy.special import jv

from rydsim.operators import Operator, hermitian_close, is_hermitian
from rydsim.system import Hamiltonian

BESSEL_THRESHOLD = 1e-6
"""Default truncation of Jacobi-Anger sums: fields with |J_n| below this are dropped."""

TimeOperator = Callable[[float], Operator]


def rotate_frame(hamiltonian: TimeOperator, h0: Operator) -> TimeOperator:
    """Move a Hamiltonian into the frame rotating with a static h0.

    Args:
        hamiltonian: Time-to-operator function H(t).
        h0: Hermitian, time-independent generator of the frame.

    Returns:
        The function t ↦ U(t)H(t)U(t)† − h0 with U(t) = exp(i h0 t).
    """
    h0 = np.asarray(h0, dtype=complex)
    if not is_hermitian(h0):
        raise ValueError("frame generator must be Hermitian")
    energies, vectors = np.linalg.eigh(h0)

    def rotated(t: float) -> Operator:
        u = (vectors * np.exp(1j * energies * t)) @ vectors.conj().T
        return u @ np.asarray(hamiltonian(t)) @ u.conj().T - h0

    return rotated


@dataclass(frozen=True)
class EffectiveChain:
    """Time-independent nearest-neighbour chain |a⟩–|b⟩–|c⟩–..."""

    labels: tuple[str, ...]
    couplings: tuple[float, ...]
    detunings: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        detunings = tuple(float(d) for d in self.detunings) or (0.0,) * len(self.labels)
        object.__setattr__(self, "detunings", detunings)
        if len(self.couplings) != len(self.labels) - 1:
            raise ValueError(
                f"{len(self.labels)} states need {len(self.labels) - 1} couplings, "
                f"got {len(self.couplings)}"
            )
        if len(self.detunings) != len(self.labels):
            raise ValueError("one detuning per state is required")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def hamiltonian(self) -> Operator:
        upper = np.diag(np.asarray(self.couplings, dtype=complex), k=1)
        return hermitian_close(upper) + np.diag(np.asarray(self.detunings, dtype=complex))

    def evolve(
        self, times: npt.ArrayLike, psi0: Optional[npt.ArrayLike] = None
    ) -> npt.NDArray[np.complex128]:
        """Propagate exactly with exp(−iHt); the default start is the first chain state.

        Returns:
            Amplitudes with shape (len(times), dim).
        """
        h = self.hamiltonian()
        start = np.zeros(self.dim, dtype=complex)
        if psi0 is None:
            start[0] = 1.0
        else:
            start = np.asarray(psi0, dtype=complex)
        return np.array([expm(-1j * h * t) @ start for t in np.atleast_1d(times)])

    def populations(self, times: npt.ArrayLike) -> dict[str, npt.NDArray[np.float64]]:
        amps = self.evolve(times)
        return {label: np.abs(amps[:, k]) ** 2 for k, label in enumerate(self.labels)}


def effective_h11(omega_m: float, omega_2: float) -> EffectiveChain:
    """Get the first-order chain |11⟩–|1r⟩–|rr⟩ at the antiblockade condition V = ω.

    Couplings are Ω2/2 and Ωm/4; with Ωm = 0 the last link vanishes and the
    chain is a Rabi pair.
    """
    return EffectiveChain(("11", "1r", "rr"), (omega_2 / 2.0, omega_m / 4.0))


def c11_analytic(t: float | npt.ArrayLike, omega_m: float, omega_2: float) -> npt.NDArray[np.float64] | float:
    """Get the closed-form |11⟩ amplitude of the first-order chain.

    [Ωm² + 4Ω2²·cos(t·√(Ωm²+4Ω2²)/4)] / (Ωm²+4Ω2²)
    """
    total = omega_m**2 + 4.0 * omega_2**2
    if total == 0.0:
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
    value = (omega_m**2 + 4.0 * omega_2**2 * np.cos(np.asarray(t) * math.sqrt(total) / 4.0)) / total
    return value if np.ndim(t) else float(value)


def c01_analytic(t: float | npt.ArrayLike, omega_2: float) -> npt.NDArray[np.float64] | float:
    """Get cos(Ω2 t/2), the resonant Rabi amplitude of |01⟩."""
    value = np.cos(omega_2 * np.asarray(t) / 2.0)
    return value if np.ndim(t) else float(value)


def theta_10(t: float | npt.ArrayLike, omega_m: float, omega: float) -> npt.NDArray[np.float64] | float:
    """Get θ(t) = Ωm sin(ωt)/2ω; |10⟩ leaks sin²θ into |r0⟩."""
    if not omega > 0:
        raise ValueError("modulation frequency must be positive")
    value = omega_m * np.sin(omega * np.asarray(t)) / (2.0 * omega)
    return value if np.ndim(t) else float(value)


@dataclass(frozen=True)
class BesselField:
    """One monochromatic component of a frequency-modulated drive."""

    order: int
    rabi: float
    detuning: float


@dataclass(frozen=True)
class BesselDecomposition:
    """Kept Bessel fields of a frequency-modulated drive."""

    fields: tuple[BesselField, ...]
    resonance_order: Optional[int]

    @property
    def resonant_field(self) -> Optional[BesselField]:
        for f in self.fields:
            if f.order == self.resonance_order:
                return f
        return None

    def orders(self) -> list[int]:
        return [f.order for f in self.fields]


def bessel_decompose(
    omega_2: float,
    delta0: float,
    delta_bar: float,
    omega_bar: float,
    n_range: Optional[Iterable[int]] = None,
    *,
    threshold: float = BESSEL_THRESHOLD,
) -> BesselDecomposition:
    """Split the drive Ω2 under detuning Δ0 + Δ̄cos(ω̄t) into Bessel-weighted fields.

    Field n has Rabi frequency Ω2·J_n(Δ̄/ω̄) and detuning Δ0 + nω̄. Fields with
    |J_n| < threshold are dropped; pass ``threshold=0`` to keep all of n_range.

    Args:
        omega_2: Bare Rabi frequency (rad/s).
        delta0: Static detuning (rad/s).
        delta_bar: Modulation depth (rad/s).
        omega_bar: Modulation frequency (rad/s), positive.
        n_range: Orders to consider; by default wide enough that the tails lie
            far below threshold.
        threshold: Truncation on |J_n(Δ̄/ω̄)|.

    Returns:
        The kept fields and the resonance order −Δ0/ω̄ when that is an integer.
    """
    if not omega_bar > 0:
        raise ValueError("omega_bar must be positive")
    x = delta_bar / omega_bar
    if n_range is None:
        n_max = int(math.ceil(abs(x))) + 40
        orders = np.arange(-n_max, n_max + 1)
    else:
        orders = np.fromiter(n_range, dtype=int)
    weights = jv(orders, x)
    fields = tuple(
        BesselField(order=int(n), rabi=float(omega_2 * w), detuning=float(delta0 + n * omega_bar))
        for n, w in zip(orders, weights)
        if abs(w) >= threshold
    )
    ratio = -delta0 / omega_bar
    resonance = int(round(ratio)) if math.isclose(ratio, round(ratio), abs_tol=1e-9) else None
    return BesselDecomposition(fields=fields, resonance_order=resonance)


def jacobi_anger_sum(
    x: float, omega_bar: float, t: float | npt.ArrayLike, n_max: int = 60
) -> npt.NDArray[np.complex128]:
    """Get Σ_{|n|≤n_max} J_n(x)e^{inω̄t}, the truncated series of exp(i x sin ω̄t)."""
    orders = np.arange(-n_max, n_max + 1)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(1j * np.outer(times, orders) * omega_bar)
    return phases @ jv(orders, x)


def polychromatic_hamiltonian(fields: Sequence[BesselField]) -> Hamiltonian:
    """Build the two-level drive Σ_n (Ω_n/2)e^{−iΔ_n t}|1⟩⟨r| + H.c. on {|01⟩, |0r⟩}.

    Populations match the frequency-modulated drive when the kept fields
    cover its Bessel spectrum; phases differ by the frame.
    """
    rabi = np.array([f.rabi for f in fields], dtype=float)
    detuning = np.array([f.detuning for f in fields], dtype=float)

    def coupling(t: float) -> complex:
        return complex(np.sum(0.5 * rabi * np.exp(-1j * detuning * t)))

    raising = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    scales = [float(np.sum(np.abs(rabi))), float(np.max(np.abs(detuning), initial=0.0))]
    return Hamiltonian(
        static=np.zeros((2, 2), dtype=complex),
        coupling_ops=(raising,),
        coupling_coeffs=(coupling,),
        drive_scales=tuple(scales),
    )


@dataclass(frozen=True)
class EffectiveH110:
    """Three-atom dynamics from |110⟩ on {|110⟩, |φ⟩, |rr0⟩}, |φ⟩ = (|r10⟩+|1r0⟩)/√2.

    The |110⟩–|φ⟩ link oscillates at ±ω and the |φ⟩–|rr0⟩ link at −(ω+V′)
    and ω−V′; their products are the two-photon exponents.
    """

    omega_m: float
    omega: float
    v_prime: float

    labels = ("110", "phi", "rr0")

    @property
    def strength(self) -> float:
        return math.sqrt(2.0) * self.omega_m / 4.0

    @property
    def two_photon_exponents(self) -> tuple[float, ...]:
        first = (-self.omega, self.omega)
        second = (-(self.omega + self.v_prime), self.omega - self.v_prime)
        return tuple(sorted(a + b for a in first for b in second))

    def is_resonant(self, tol: float = 1e-9) -> bool:
        """Check for a static two-photon channel (V′ = ±2ω)."""
        scale = max(abs(self.omega), abs(self.v_prime), 1.0)
        return any(abs(e) <= tol * scale for e in self.two_photon_exponents)

    def __call__(self, t: float) -> Operator:
        g = self.strength
        first = g * 2.0 * math.cos(self.omega * t)
        second = g * (
            np.exp(-1j * (self.omega + self.v_prime) * t) + np.exp(1j * (self.omega - self.v_prime) * t)
        )
        upper = np.zeros((3, 3), dtype=complex)
        upper[0, 1] = first
        upper[1, 2] = second
        return hermitian_close(upper)


def effective_h110(omega_m: float, omega: float, v_prime: float) -> EffectiveH110:
    """Get the |110⟩ dynamics for a third atom at interaction V′ from the target."""
    return EffectiveH110(omega_m=omega_m, omega=omega, v_prime=v_prime)


def effective_h111(omega_m: float, omega_2: float) -> EffectiveChain:
    """Get the chain |111⟩–|11r⟩–|Φ⟩, |Φ⟩ = (|r1r⟩+|1rr⟩)/√2, couplings Ω2/2 and √2Ωm/4."""
    return EffectiveChain(("111", "11r", "Phi"), (omega_2 / 2.0, math.sqrt(2.0) * omega_m / 4.0))


def blocked_leakage_bound(omega_m: float, omega_2: float) -> float:
    """Bound the |111⟩ leakage, 4·(Ω2/2)²/(√2Ωm/4)², valid for Ωm ≫ Ω2."""
    if omega_m == 0:
        return math.inf
    return 4.0 * (omega_2 / 2.0) ** 2 / (math.sqrt(2.0) * omega_m / 4.0) ** 2
