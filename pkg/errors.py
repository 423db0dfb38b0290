"""
Exception hierarchy for front-lab.

Every error raised on purpose by the library derives from FrontLabError so the
experiment runner can record it in a report instead of crashing the CLI.
"""

from typing import Optional, Sequence


class FrontLabError(Exception):
    """Base class for all front-lab errors."""


class DomainError(FrontLabError, ValueError):
    """A parameter violates the precondition of an operation."""


class NoConnectionError(FrontLabError):
    """Shooting could not bracket a heteroclinic connection."""

    def __init__(self, message: str = "no connection found"):
        super().__init__(message)


class CFLError(FrontLabError):
    """Time step above the explicit stability limit."""

    def __init__(self, dt: float, limit: float):
        self.dt = dt
        self.limit = limit
        super().__init__(f"dt={dt:.6g} exceeds the CFL limit {limit:.6g}")


class EvolutionError(FrontLabError):
    """Non-finite value produced while stepping."""

    def __init__(self, index: Sequence[int], position: Sequence[float], t: float):
        self.index = tuple(int(i) for i in index)
        self.position = tuple(float(x) for x in position)
        self.t = float(t)
        super().__init__(
            f"non-finite value at node {self.index} (x={self.position}) at t={self.t:.6g}"
        )


class WindowOverflowError(FrontLabError):
    """The tracked interface came too close to a window edge."""


class RelaxationError(FrontLabError):
    """A steady-state relaxation did not converge."""

    def __init__(self, message: str, last_residual: float):
        self.last_residual = float(last_residual)
        super().__init__(f"{message} (last residual {self.last_residual:.3e})")


class GeometryError(FrontLabError):
    """Invalid geometric input (empty interface set, mismatched grids)."""


class ConfigError(FrontLabError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
