# core/exceptions.py

from typing import Any, List, Optional


class SurgeryKitError(Exception):
    """Base class for every error raised by surgerykit."""
    pass


class UnsupportedRingError(SurgeryKitError):
    """Raised when an operation needs the integers but got another ring."""
    pass


class RingMismatchError(SurgeryKitError):
    """Raised when two operands live over different rings."""
    pass


class DimensionMismatchError(SurgeryKitError):
    """Raised on incompatible matrix or block shapes."""
    pass


class InvalidStructureError(SurgeryKitError):
    """Raised when a constructor receives a structure failing its relation."""

    def __init__(self, message: str, failures: Optional[List[Any]] = None):
        super().__init__(message)
        self.failures = failures or []


class SimplicialError(SurgeryKitError):
    """Raised for face, closure, embedding and decomposition errors."""
    pass


class CoverError(SurgeryKitError):
    """Raised when group action data does not define a Galois cover."""
    pass


class SuspensionError(SurgeryKitError):
    """Raised by the suspension ring and graded-object machinery."""
    pass


class SignConventionError(SurgeryKitError):
    """Raised whenever a sign convention is unknown or inconsistent."""
    pass


class ScenarioError(SurgeryKitError):
    """Parse or load diagnostic for scenario documents."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")
