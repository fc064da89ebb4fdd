"""Typed exceptions raised across the library.

Every failure mode that callers are expected to branch on gets its own
class; all of them derive from :class:`DemandLabError` so a bare
``except DemandLabError`` catches any library-specific problem without
swallowing genuine bugs.
"""

from __future__ import annotations


class DemandLabError(Exception):
    """Base class for all library-specific failures."""


class BoundViolation(DemandLabError):
    """A family parameter fell outside its admissible range.

    Carries the offending value and the bound so callers can report both.
    """

    def __init__(self, message: str, *, delta: float | None = None,
                 bound: float | None = None):
        super().__init__(message)
        self.delta = delta
        self.bound = bound


class NoDensity(DemandLabError):
    """The population has no joint density (a degenerate component)."""


class DegenerateRatio(DemandLabError):
    """The good-value/money-value ratio is ill-defined or unbounded."""


class QuadratureFailure(DemandLabError):
    """Adaptive integration hit its refinement cap above tolerance."""

    def __init__(self, message: str, *, achieved: float | None = None,
                 requested: float | None = None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class MonotonicityViolation(DemandLabError):
    """A curve that must be monotone is not, beyond tolerance."""


class BoundaryMassZero(DemandLabError):
    """No probability mass near the lower ratio endpoint."""


class DemoFailure(DemandLabError):
    """A demonstration assertion failed; names the check and the value."""

    def __init__(self, message: str, *, check: str | None = None,
                 value: float | None = None):
        super().__init__(message)
        self.check = check
        self.value = value


class TailMassExceeded(DemandLabError):
    """A tabulated distribution leaks too much mass past its grid."""


class IllConditioned(DemandLabError):
    """A linear system's condition estimate exceeded the safety cap."""

    def __init__(self, message: str, *, order: int | None = None,
                 condition: float | None = None):
        super().__init__(message)
        self.order = order
        self.condition = condition


class InsufficientPrices(DemandLabError):
    """Too few distinct prices to determine the requested moments."""


class ScenarioError(DemandLabError):
    """A scenario document failed schema validation."""
