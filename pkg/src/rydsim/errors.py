"""Exception types raised by rydsim."""

from __future__ import annotations

from typing import Mapping, Optional


class RydsimError(Exception):
    """Base class for every error raised on purpose by rydsim."""


class ConfigError(RydsimError, ValueError):
    """A scenario, campaign or tolerance document failed validation.

    Attributes:
        field: Dotted path of the offending field (``drives.1.rabi``), if known.
        line: Line number in the source file, if the error came from parsing.
    """

    def __init__(
        self, message: str, *, field: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        self.message = message
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class IntegrationError(RydsimError, RuntimeError):
    """The ODE integrator could not reach the requested final time."""

    def __init__(self, message: str, *, time: float) -> None:
        self.time = time
        super().__init__(f"{message} (at t={time:.6e} s)")


class UndefinedPhaseError(RydsimError, ValueError):
    """A phase was requested for an amplitude too small to carry one."""


class GoldenMismatchError(RydsimError):
    """Regression check found metrics outside their tolerance."""

    def __init__(self, preset: str, diffs: Mapping[str, tuple[float, float, float]]):
        self.preset = preset
        self.diffs = dict(diffs)
        details = ", ".join(
            f"{name}: got {got:.6g}, golden {want:.6g}, tol {tol:.1e}"
            for name, (got, want, tol) in self.diffs.items()
        )
        super().__init__(f"preset '{preset}' regressed: {details}")


class RegimeWarning(UserWarning):
    """A physical approximation is used outside its comfortable regime."""
