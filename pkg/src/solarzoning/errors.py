"""Exception types shared across the package."""

from __future__ import annotations


class SolarZoningError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SolarZoningError, ValueError):
    """An input value violates a documented precondition."""


class OrdinanceParseError(SolarZoningError, ValueError):
    """The ordinance table is malformed (bad columns, duplicates, bad cells)."""


class ConfigError(SolarZoningError, ValueError):
    """A scenario configuration is missing, malformed, or references absent inputs."""


class DimensionMismatchError(SolarZoningError, ValueError):
    """Two runs or tables cannot be compared because their dimensions differ."""


class InfeasiblePlanError(SolarZoningError, RuntimeError):
    """The expansion problem has no feasible plan.

    Carries a structured ``diagnosis`` dict naming the binding requirement
    when the cause could be identified (e.g. an unreachable solar share).
    """

    def __init__(self, message: str, diagnosis: dict | None = None):
        super().__init__(message)
        self.diagnosis = diagnosis or {}
