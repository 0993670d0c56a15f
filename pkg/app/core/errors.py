"""
Exception hierarchy shared by the library, the CLI and the HTTP routes.

Each class carries the process exit code the CLI uses for it.
"""
from typing import Any, Dict, Optional


class QuantumToolkitError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InvalidArgumentError(QuantumToolkitError, ValueError):
    """An argument violates an operation's precondition"""
    exit_code = 2


class DegenerateInputError(QuantumToolkitError):
    """A state has (numerically) vanishing norm after an operation"""
    exit_code = 2


class DegenerateDataError(QuantumToolkitError):
    """Count data carries no usable signal"""
    exit_code = 2


class ConvergenceError(QuantumToolkitError):
    """An optimizer or resampling run failed to produce a usable result"""
    exit_code = 3


class DataFileError(QuantumToolkitError):
    """Reading or writing a state, count or report file failed"""
    exit_code = 4


def http_status_for(error: QuantumToolkitError) -> int:
    """HTTP status the routes answer with for a toolkit error"""
    if isinstance(error, ConvergenceError):
        return 422
    if isinstance(error, (InvalidArgumentError, DegenerateInputError, DegenerateDataError)):
        return 400
    return 500
