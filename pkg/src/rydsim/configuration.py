"""Define the configurable parameters for propagation runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Literal, Mapping, Optional

from rydsim.errors import ConfigError

Method = Literal["adaptive_rk", "fixed_rk4"]
RKPair = Literal["RK45", "DOP853"]

STEPS_PER_PERIOD = 20
"""The max_step cap resolves the fastest frequency with this many steps per period."""


@dataclass(frozen=True, kw_only=True)
class IntegratorConfig:
    """The configuration for one trajectory integration."""

    method: Method = field(
        default="adaptive_rk",
        metadata={
            "description": "Integration scheme. 'adaptive_rk' uses an embedded Runge-Kutta pair "
            "with dense output; 'fixed_rk4' is the classical fixed-step oracle."
        },
    )

    rk_pair: RKPair = field(
        default="DOP853",
        metadata={"description": "Embedded pair used by 'adaptive_rk'."},
    )

    rel_tol: float = field(
        default=1e-10,
        metadata={"description": "Relative tolerance of the adaptive controller."},
    )

    abs_tol: float = field(
        default=1e-12,
        metadata={"description": "Absolute tolerance of the adaptive controller."},
    )

    max_step: Optional[float] = field(
        default=None,
        metadata={
            "description": "Largest step in seconds. Always clipped to "
            "(1/20)(2π/f_max) where f_max is the fastest angular frequency in the scenario."
        },
    )

    fixed_step: Optional[float] = field(
        default=None,
        metadata={
            "description": "Step of 'fixed_rk4' in seconds; defaults to the max_step cap."
        },
    )

    sample_times: tuple[float, ...] = field(
        default=(),
        metadata={"description": "Times (s) at which states are recorded."},
    )

    n_samples: int = field(
        default=401,
        metadata={
            "description": "Number of evenly spaced samples on [0, t_final] used when "
            "sample_times is empty."
        },
    )

    blockade_cutoff: Optional[float] = field(
        default=None,
        metadata={
            "description": "Basis states whose static energy exceeds this (rad/s) are "
            "removed before integration. None keeps the full space."
        },
    )

    def __post_init__(self) -> None:
        if self.method not in ("adaptive_rk", "fixed_rk4"):
            raise ConfigError(f"unknown method {self.method!r}", field="method")
        if self.rk_pair not in ("RK45", "DOP853"):
            raise ConfigError(f"unknown Runge-Kutta pair {self.rk_pair!r}", field="rk_pair")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be positive", field="rel_tol")
        if self.max_step is not None and not self.max_step > 0:
            raise ConfigError("max_step must be positive", field="max_step")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise ConfigError("fixed_step must be positive", field="fixed_step")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2", field="n_samples")
        if self.blockade_cutoff is not None and not self.blockade_cutoff > 0:
            raise ConfigError("blockade_cutoff must be positive", field="blockade_cutoff")
        object.__setattr__(self, "sample_times", tuple(float(t) for t in self.sample_times))

    def step_cap(self, f_max: float) -> float:
        """Get the largest admissible step for a scenario whose fastest angular frequency is f_max."""
        if f_max <= 0:
            return float("inf") if self.max_step is None else self.max_step
        cap = 2.0 * math.pi / f_max / STEPS_PER_PERIOD
        return cap if self.max_step is None else min(self.max_step, cap)

    def with_tolerance(self, rel_tol: float) -> IntegratorConfig:
        """Copy with a new relative tolerance; the absolute one keeps its ratio."""
        ratio = self.abs_tol / self.rel_tol
        return replace(self, rel_tol=rel_tol, abs_tol=rel_tol * ratio)

    def to_dict(self) -> dict[str, Any]:
        """Dump to a JSON-compatible mapping (seconds, rad/s)."""
        return {f.name: getattr(self, f.name) for f in fields(self)} | {
            "sample_times": list(self.sample_times)
        }

    @classmethod
    def from_mapping(cls, mapping: Optional[Mapping[str, Any]] = None) -> IntegratorConfig:
        """Create an IntegratorConfig from a plain mapping, rejecting unknown keys."""
        mapping = dict(mapping or {})
        _fields = {f.name for f in fields(cls) if f.init}
        unknown = sorted(set(mapping) - _fields)
        if unknown:
            raise ConfigError(f"unknown integrator keys {unknown}", field="integrator")
        if "sample_times" in mapping:
            mapping["sample_times"] = tuple(mapping["sample_times"])
        try:
            return cls(**mapping)
        except TypeError as exc:
            raise ConfigError(str(exc), field="integrator") from exc
