"""Exception hierarchy shared by the solver modules and the CLI."""

from __future__ import annotations


class DiracError(Exception):
    """Base class for every error raised by :mod:`diracnodes`."""


class DomainError(DiracError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(DiracError, ValueError):
    """A problem description is malformed or violates an invariant.

    ``field`` names the offending parameter so callers can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class UnsupportedPotentialError(ValidationError):
    """The potential is outside the supported singularity class."""


class SupercriticalError(ValidationError):
    """The origin singularity is too strong: ``v0**2 >= k_d**2``."""


class NumericalError(DiracError):
    """Base for failures of the numerical machinery."""


class IntegrationError(NumericalError):
    def __init__(self, message: str, radius: float, energy: float | None = None):
        super().__init__(message)
        self.radius = radius
        self.energy = energy

    def __str__(self) -> str:
        msg = f"{self.args[0]} (r={self.radius:.6g}"
        if self.energy is not None:
            msg += f", E={self.energy:.15g}"
        return msg + ")"


class AmbiguousNodeError(NumericalError):
    """Two consecutive negligible samples in the interior of a trajectory."""


class LabelingError(NumericalError):
    """Node-count labels are inconsistent (non-monotone or duplicated)."""


class StateNotFoundError(DiracError):
    def __init__(self, message: str, available: list[int] | None = None):
        super().__init__(message)
        self.available = list(available or [])

    def __str__(self) -> str:
        if self.available:
            return f"{self.args[0]}; available n1 labels: {self.available}"
        return f"{self.args[0]}; no bound states found"
