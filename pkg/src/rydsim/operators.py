"""Multi-atom operators on tensor products of per-atom level sets.

Basis ordering is lexicographic over (atom 1, atom 2, ...) with the per-atom
order (g0, g1, ryd, leak). Dense storage throughout: the largest space in
scope is four three-level atoms (dimension 81).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

Operator = npt.NDArray[np.complex128]

NORM_TOL = 1e-9
POSITIVITY_TOL = 1e-8


class Level(str, enum.Enum):
    """Atomic levels, in basis order."""

    G0 = "g0"
    G1 = "g1"
    RYD = "ryd"
    LEAK = "leak"

    @property
    def symbol(self) -> str:
        """Get the one-character ket label used in CSV headers ("0", "1", "r", "g")."""
        return _SYMBOLS[self]


_SYMBOLS = {Level.G0: "0", Level.G1: "1", Level.RYD: "r", Level.LEAK: "g"}
_ORDER = {level: i for i, level in enumerate(Level)}


def as_level(value: Level | str) -> Level:
    """Coerce a label or one-character symbol to a Level."""
    if isinstance(value, Level):
        return value
    for level in Level:
        if value in (level.value, level.symbol):
            return level
    raise ValueError(f"invalid level label {value!r}")


@dataclass(frozen=True)
class LevelScheme:
    """Ordered level set of one atom."""

    levels: tuple[Level, ...] = (Level.G0, Level.G1, Level.RYD)

    def __post_init__(self) -> None:
        levels = tuple(as_level(lv) for lv in self.levels)
        if len(set(levels)) != len(levels):
            raise ValueError(f"duplicate levels in {levels}")
        missing = {Level.G0, Level.G1, Level.RYD} - set(levels)
        if missing:
            raise ValueError(f"level scheme lacks {sorted(m.value for m in missing)}")
        object.__setattr__(self, "levels", tuple(sorted(levels, key=_ORDER.__getitem__)))

    @classmethod
    def with_leak(cls) -> LevelScheme:
        """Get the four-level scheme used when decay is modeled."""
        return cls((Level.G0, Level.G1, Level.RYD, Level.LEAK))

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def has_leak(self) -> bool:
        return Level.LEAK in self.levels

    def index(self, level: Level | str) -> int:
        """Get the position of a level inside this atom's basis."""
        level = as_level(level)
        try:
            return self.levels.index(level)
        except ValueError:
            raise ValueError(f"level {level.value!r} not in scheme") from None

    def ket(self, level: Level | str) -> npt.NDArray[np.complex128]:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index(level)] = 1.0
        return vec

    def transition(self, a: Level | str, b: Level | str) -> Operator:
        """Get the single-atom operator |a⟩⟨b|."""
        op = np.zeros((self.dim, self.dim), dtype=complex)
        op[self.index(a), self.index(b)] = 1.0
        return op


Schemes = Sequence[LevelScheme]


def total_dim(schemes: Schemes) -> int:
    """Get the dimension of the tensor-product space."""
    return int(np.prod([s.dim for s in schemes])) if schemes else 1


def embed(single_atom_op: Operator, atom_index: int, schemes: Schemes) -> Operator:
    """Place a single-atom operator at atom_index, identity on every other atom.

    Args:
        single_atom_op: Square matrix of the indexed atom's dimension.
        atom_index: Zero-based atom position.
        schemes: Level scheme of every atom.

    Returns:
        The ``identity ⊗ ... ⊗ op ⊗ ... ⊗ identity`` operator.
    """
    if not 0 <= atom_index < len(schemes):
        raise IndexError(f"atom index {atom_index} out of range for {len(schemes)} atoms")
    op = np.asarray(single_atom_op, dtype=complex)
    d = schemes[atom_index].dim
    if op.shape != (d, d):
        raise ValueError(
            f"operator shape {op.shape} does not match atom {atom_index} dimension {d}"
        )
    left = total_dim(schemes[:atom_index])
    right = total_dim(schemes[atom_index + 1 :])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def embed_many(ops: Mapping[int, Operator], schemes: Schemes) -> Operator:
    """Build the product of single-atom operators on distinct atoms in one kron chain."""
    factors = []
    for j, scheme in enumerate(schemes):
        op = np.asarray(ops.get(j, np.eye(scheme.dim)), dtype=complex)
        if op.shape != (scheme.dim, scheme.dim):
            raise ValueError(f"operator for atom {j} has shape {op.shape}")
        factors.append(op)
    unknown = set(ops) - set(range(len(schemes)))
    if unknown:
        raise IndexError(f"atom indices {sorted(unknown)} out of range")
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def pair_projector(
    a: Level | str, b: Level | str, atoms: tuple[int, int], schemes: Schemes
) -> Operator:
    """Project atoms (i, j) onto the product level |a⟩_i|b⟩_j, identity elsewhere."""
    i, j = atoms
    if i == j:
        raise ValueError("pair projector needs two distinct atoms")
    pa = schemes[i].transition(a, a)
    pb = schemes[j].transition(b, b)
    return embed_many({i: pa, j: pb}, schemes)


def number_operator(level: Level | str, atom: int, schemes: Schemes) -> Operator:
    """Get |level⟩_atom⟨level|."""
    return embed(schemes[atom].transition(level, level), atom, schemes)


def dagger(op: Operator) -> Operator:
    """Get the conjugate transpose."""
    return np.conj(np.asarray(op)).T


def hermitian_close(op: Operator) -> Operator:
    """Add the Hermitian conjugate: A + A†."""
    op = np.asarray(op, dtype=complex)
    return op + dagger(op)


def is_hermitian(op: Operator, tol: float = 1e-12) -> bool:
    """Check Hermiticity relative to the operator's scale."""
    op = np.asarray(op)
    scale = max(1.0, float(np.max(np.abs(op))) if op.size else 0.0)
    return bool(np.max(np.abs(op - dagger(op)), initial=0.0) <= tol * scale)


def basis_labels(schemes: Schemes) -> list[str]:
    """Label every basis state, e.g. ``"1r"`` for atom 1 in |1⟩ and atom 2 in |r⟩."""
    return ["".join(lv.symbol for lv in combo) for combo in product(*(s.levels for s in schemes))]


def computational_labels(n_atoms: int) -> list[str]:
    """Get the computational bit strings in basis order ("00", "01", ...)."""
    return ["".join(bits) for bits in product("01", repeat=n_atoms)]


def computational_indices(schemes: Schemes) -> dict[str, int]:
    """Map every computational bit string to its full-space basis index."""
    labels = basis_labels(schemes)
    position = {label: i for i, label in enumerate(labels)}
    return {bits: position[bits] for bits in computational_labels(len(schemes))}


def restrict(op: Operator, indices: npt.ArrayLike) -> Operator:
    """Keep the rows and columns listed in indices."""
    idx = np.asarray(indices, dtype=int)
    return np.asarray(op)[np.ix_(idx, idx)]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state."""

    amplitudes: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm is {norm:.12f}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    @classmethod
    def normalized(cls, amplitudes: npt.ArrayLike) -> StateVector:
        """Build a state after rescaling to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def from_computational(
        cls, amplitudes: Mapping[str, complex], schemes: Schemes, *, normalize: bool = False
    ) -> StateVector:
        """Build a state from computational-basis amplitudes keyed by bit string."""
        index = computational_indices(schemes)
        amps = np.zeros(total_dim(schemes), dtype=complex)
        for bits, value in amplitudes.items():
            if bits not in index:
                raise ValueError(f"{bits!r} is not a computational label for {len(schemes)} atoms")
            amps[index[bits]] = value
        return cls.normalized(amps) if normalize else cls(amps)

    @classmethod
    def uniform_computational(cls, schemes: Schemes) -> StateVector:
        """Get ⊗(|0⟩+|1⟩)/√2 over every atom."""
        n = len(schemes)
        amp = 2.0 ** (-n / 2)
        return cls.from_computational(dict.fromkeys(computational_labels(n), amp), schemes)

    def overlap(self, other: StateVector) -> complex:
        """Get ⟨self|other⟩."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state."""

    entries: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {trace:.12f}, expected 1")
        if np.min(np.linalg.eigvalsh(rho)) < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityMatrix:
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)

    def expectation(self, op: Operator) -> complex:
        return complex(np.trace(np.asarray(op) @ self.entries))


def lift(vector: npt.ArrayLike, indices: Iterable[int], dim: int) -> npt.NDArray[np.complex128]:
    """Scatter a subspace vector (or matrix) back into the full space, zeros elsewhere."""
    arr = np.asarray(vector, dtype=complex)
    idx = np.fromiter(indices, dtype=int)
    if arr.ndim == 1:
        out = np.zeros(dim, dtype=complex)
        out[idx] = arr
        return out
    out = np.zeros((dim, dim), dtype=complex)
    out[np.ix_(idx, idx)] = arr
    return out
