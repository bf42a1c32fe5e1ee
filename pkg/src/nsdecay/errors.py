"""Exception hierarchy for ns-decay-lab."""

from __future__ import annotations


class NsDecayError(Exception):
    """Base class for every error raised by the package."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ConfigurationError(NsDecayError, ValueError):
    """Invalid experiment, solver or verifier configuration."""

    def __init__(self, message: str, *, key: str | None = None, line: int | None = None) -> None:
        super().__init__(message)
        self.key = key
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


class DomainError(NsDecayError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class StructuralError(NsDecayError, ValueError):
    """Array shape does not match the grid it claims to live on."""


class RangeError(NsDecayError, ValueError):
    """Requested time or window lies outside a recorded series."""


class BlowUpError(NsDecayError, RuntimeError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, time: float) -> None:
        super().__init__(f"solution blew up at t = {time:.6g}")
        self.time = time
