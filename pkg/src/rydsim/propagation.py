"""Integration of the Schrödinger and Lindblad equations for gate Hamiltonians."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.integrate import solve_ivp

from rydsim.configuration import IntegratorConfig
from rydsim.errors import IntegrationError
from rydsim.operators import DensityMatrix, Operator, StateVector, lift, restrict
from rydsim.system import Hamiltonian, blockade_subspace

logger = logging.getLogger(__name__)

DRIFT_WARN = 1e-8
POSITIVITY_WARN = -1e-6

RHS = Callable[[float, npt.NDArray[np.complex128]], npt.NDArray[np.complex128]]


@dataclass
class Trajectory:
    """Sampled states of one run.

    ``states`` has shape (n_t, dim) for pure runs and (n_t, dim, dim) for
    density matrices, always in the full basis.
    """

    times: npt.NDArray[np.float64]
    states: npt.NDArray[np.complex128]
    labels: list[str] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def mixed(self) -> bool:
        return self.states.ndim == 3

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def populations(self) -> npt.NDArray[np.float64]:
        """Get basis-state populations, shape (n_t, dim)."""
        if self.mixed:
            return np.real(np.diagonal(self.states, axis1=1, axis2=2))
        return np.abs(self.states) ** 2

    def to_frame(self) -> pd.DataFrame:
        """Tabulate as columns t, pop_<label> for every basis state."""
        labels = self.labels or [str(k) for k in range(self.dim)]
        frame = pd.DataFrame(self.populations(), columns=[f"pop_{b}" for b in labels])
        frame.insert(0, "t", self.times)
        return frame


def sample_grid(cfg: IntegratorConfig, t_final: Optional[float]) -> npt.NDArray[np.float64]:
    """Get the sorted, unique sample times of a run."""
    if cfg.sample_times:
        times = np.unique(np.asarray(cfg.sample_times, dtype=float))
        if times[0] < 0:
            raise ValueError("sample times must be non-negative")
        if t_final is not None and times[-1] > t_final * (1 + 1e-12):
            raise ValueError(f"sample time {times[-1]} beyond t_final {t_final}")
        return times
    if t_final is None or not t_final > 0:
        raise ValueError("t_final is required when no sample times are configured")
    return np.linspace(0.0, t_final, cfg.n_samples)


def _segments(times: npt.NDArray[np.float64], breakpoints: Sequence[float]) -> list[tuple[float, float]]:
    edges = [0.0, *(b for b in sorted(breakpoints) if 0.0 < b < times[-1]), float(times[-1])]
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _rk4(rhs: RHS, y: npt.NDArray[np.complex128], a: float, b: float, h: float) -> npt.NDArray[np.complex128]:
    n = max(1, math.ceil((b - a) / h - 1e-9))
    dt = (b - a) / n
    t = a
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return y


def _step(cfg: IntegratorConfig, f_max: float, t_end: float) -> float:
    step = cfg.step_cap(f_max)
    if cfg.method == "fixed_rk4" and cfg.fixed_step is not None:
        step = min(step, cfg.fixed_step)
    return step if math.isfinite(step) else max(t_end, 1e-12)


def integrate(
    segment_rhs: Callable[[float, float], RHS],
    y0: npt.NDArray[np.complex128],
    times: npt.NDArray[np.float64],
    breakpoints: Sequence[float],
    cfg: IntegratorConfig,
    step: float,
) -> tuple[npt.NDArray[np.complex128], dict[str, Any]]:
    """Integrate y' = rhs(t, y) from t=0, sampling at times.

    Integration restarts at every breakpoint, so no step straddles a drive
    discontinuity. ``segment_rhs(a, b)`` gives the right-hand side valid on
    the closed segment [a, b].

    Returns:
        Samples with shape (len(times), y0.size) and solver statistics.
    """
    samples = np.empty((times.size, y0.size), dtype=complex)
    filled = np.zeros(times.size, dtype=bool)
    stats: dict[str, Any] = {"nfev": 0, "segments": 0}
    y = np.asarray(y0, dtype=complex)
    if times[0] == 0.0:
        samples[0] = y
        filled[0] = True

    for a, b in _segments(times, breakpoints):
        mask = (times > a) & (times <= b) & ~filled
        t_eval = times[mask]
        stats["segments"] += 1
        rhs = segment_rhs(a, b)
        if cfg.method == "fixed_rk4":
            knots = [a, *t_eval[t_eval < b], b]
            out = []
            for lo, hi in zip(knots[:-1], knots[1:]):
                y = _rk4(rhs, y, lo, hi, step)
                out.append(y)
            values = np.array(out[: t_eval.size]) if t_eval.size else np.empty((0, y.size))
            stats["nfev"] += 4 * sum(max(1, math.ceil((hi - lo) / step)) for lo, hi in zip(knots[:-1], knots[1:]))
        else:
            sol = solve_ivp(
                rhs,
                (a, b),
                y,
                method=cfg.rk_pair,
                t_eval=np.append(t_eval[t_eval < b], b),
                rtol=cfg.rel_tol,
                atol=cfg.abs_tol,
                max_step=step,
            )
            stats["nfev"] += int(sol.nfev)
            if sol.status != 0:
                t_fail = float(sol.t[-1]) if sol.t.size else a
                raise IntegrationError(sol.message, time=t_fail)
            y = sol.y[:, -1]
            values = sol.y.T[: t_eval.size]
        samples[mask] = values
        filled |= mask

    if not filled.all():
        raise IntegrationError("sample times not reached", time=float(times[~filled][0]))
    return samples, stats


def _on_segment(h: Hamiltonian | Callable[[float], Operator], a: float, b: float) -> Callable[[float], Operator]:
    return h.on_segment(a, b) if isinstance(h, Hamiltonian) else h


def _prepare(
    hamiltonian: Hamiltonian | Callable[[float], Operator],
    dim: int,
    cfg: IntegratorConfig,
) -> tuple[Callable[[float], Operator], npt.NDArray[np.int_], float, tuple[float, ...]]:
    if isinstance(hamiltonian, Hamiltonian):
        indices = (
            blockade_subspace(hamiltonian, cfg.blockade_cutoff)
            if cfg.blockade_cutoff is not None
            else np.arange(dim)
        )
        h = hamiltonian.restrict(indices) if indices.size < dim else hamiltonian
        return h, indices, h.frequency_scale(), h.breakpoints
    h0 = np.asarray(hamiltonian(0.0))
    return hamiltonian, np.arange(dim), float(np.max(np.abs(h0), initial=0.0)), ()


def evolve_schrodinger(
    hamiltonian: Hamiltonian | Callable[[float], Operator],
    psi0: StateVector | npt.ArrayLike,
    cfg: Optional[IntegratorConfig] = None,
    *,
    t_final: Optional[float] = None,
    labels: Optional[list[str]] = None,
) -> Trajectory:
    """Solve i∂ψ/∂t = H(t)ψ from t = 0.

    Args:
        hamiltonian: Assembled Hamiltonian, or any time-to-operator function.
        psi0: Initial state.
        cfg: Integrator settings; defaults to IntegratorConfig().
        t_final: End time when cfg has no sample times.
        labels: Basis labels for the trajectory table.

    Returns:
        The sampled trajectory in the full basis.
    """
    cfg = cfg or IntegratorConfig()
    amps = psi0.amplitudes if isinstance(psi0, StateVector) else np.asarray(psi0, dtype=complex)
    dim = amps.size
    times = sample_grid(cfg, t_final)
    h, indices, f_max, breakpoints = _prepare(hamiltonian, dim, cfg)
    outside = np.delete(amps, indices)
    if outside.size and np.max(np.abs(outside)) > 1e-12:
        raise ValueError("initial state has weight on states removed by the blockade cutoff")
    step = _step(cfg, f_max, float(times[-1]))

    def segment_rhs(a: float, b: float) -> RHS:
        hs = _on_segment(h, a, b)

        def rhs(t: float, y: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
            return -1j * (hs(t) @ y)

        return rhs

    logger.debug("schrodinger: dim=%d of %d, f_max=%.3e, step<=%.3e", indices.size, dim, f_max, step)
    reduced, stats = integrate(segment_rhs, amps[indices], times, breakpoints, cfg, step)
    states = reduced if indices.size == dim else np.array([lift(s, indices, dim) for s in reduced])

    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > DRIFT_WARN:
        logger.warning("norm drift %.2e exceeds %.0e", drift, DRIFT_WARN)
    stats |= {
        "method": cfg.method,
        "rk_pair": cfg.rk_pair,
        "f_max": f_max,
        "max_step": step,
        "subspace_dim": int(indices.size),
        "norm_drift": drift,
    }
    return Trajectory(times=times, states=states, labels=list(labels or []), metadata=stats)


def evolve_lindblad(
    hamiltonian: Hamiltonian | Callable[[float], Operator],
    collapse_ops: Sequence[Operator],
    rho0: DensityMatrix | npt.ArrayLike,
    cfg: Optional[IntegratorConfig] = None,
    *,
    t_final: Optional[float] = None,
    labels: Optional[list[str]] = None,
) -> Trajectory:
    """Solve dρ/dt = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}) from t = 0.

    The density matrix is integrated as a flat vector with the right-hand
    side evaluated directly.
    """
    cfg = cfg or IntegratorConfig()
    rho = rho0.entries if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    dim = rho.shape[0]
    for k, op in enumerate(collapse_ops):
        if np.shape(op) != (dim, dim):
            raise ValueError(f"collapse operator {k} has shape {np.shape(op)}, expected {(dim, dim)}")
    times = sample_grid(cfg, t_final)
    h, indices, f_max, breakpoints = _prepare(hamiltonian, dim, cfg)
    d = indices.size
    jumps = (
        np.array([restrict(op, indices) for op in collapse_ops], dtype=complex)
        if len(collapse_ops)
        else np.zeros((0, d, d), dtype=complex)
    )
    jumps_dag = np.conj(np.swapaxes(jumps, 1, 2))
    damping = 0.5 * np.einsum("kij,kjl->il", jumps_dag, jumps)
    step = _step(cfg, f_max, float(times[-1]))

    def segment_rhs(a: float, b: float) -> RHS:
        hs = _on_segment(h, a, b)

        def rhs(t: float, y: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
            r = y.reshape(d, d)
            h_eff = hs(t) - 1j * damping
            out = -1j * (h_eff @ r - r @ h_eff.conj().T)
            if jumps.shape[0]:
                out += np.einsum("kij,jl,klm->im", jumps, r, jumps_dag)
            return out.ravel()

        return rhs

    logger.debug("lindblad: dim=%d of %d, %d jumps, step<=%.3e", d, dim, len(collapse_ops), step)
    reduced, stats = integrate(segment_rhs, restrict(rho, indices).ravel(), times, breakpoints, cfg, step)
    blocks = reduced.reshape(-1, d, d)
    states = blocks if d == dim else np.array([lift(b, indices, dim) for b in blocks])

    trace_drift = float(np.max(np.abs(np.trace(states, axis1=1, axis2=2) - 1.0)))
    herm_drift = float(np.max(np.abs(states - np.conj(np.swapaxes(states, 1, 2)))))
    min_eig = float(min(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() for s in states))
    if max(trace_drift, herm_drift) > DRIFT_WARN:
        logger.warning("trace drift %.2e, hermiticity drift %.2e", trace_drift, herm_drift)
    if min_eig < POSITIVITY_WARN:
        logger.warning("density matrix eigenvalue %.2e below %.0e", min_eig, POSITIVITY_WARN)
    stats |= {
        "method": cfg.method,
        "rk_pair": cfg.rk_pair,
        "f_max": f_max,
        "max_step": step,
        "subspace_dim": int(d),
        "n_collapse": len(collapse_ops),
        "trace_drift": trace_drift,
        "hermiticity_drift": herm_drift,
        "min_eigenvalue": min_eig,
    }
    return Trajectory(times=times, states=states, labels=list(labels or []), metadata=stats)
