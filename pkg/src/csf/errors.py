"""Exception hierarchy; each class carries the CLI exit code it maps to."""

from __future__ import annotations


class CSFError(Exception):
    exit_code = 1


class ConfigError(CSFError, ValueError):
    """Bad parameters (ladder, repetitions, thresholds)."""

    exit_code = 2


class ValidationError(CSFError, ValueError):
    """Input violates a data invariant (non-positive range, unsorted bearings...)."""

    exit_code = 3


class ScanFormatError(ValidationError):
    """Malformed record in a scan, world or feature file."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path


class DegenerateGeometryError(CSFError, ArithmeticError):
    """The requested geometric quantity does not exist or is ill-posed."""

    exit_code = 4


class ParallelLinesError(DegenerateGeometryError):
    pass


class AmbiguousDirectionError(DegenerateGeometryError):
    """Isotropic scatter: no preferred line direction."""


class UnreliableCovarianceWarning(UserWarning):
    pass
