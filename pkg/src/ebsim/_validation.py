"""Exception types and small input-checking helpers shared across modules."""
from __future__ import annotations

import math

import numpy as np


class EBSError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(EBSError, ValueError):
    pass


class EmptyInputError(EBSError, ValueError):
    pass


class DomainError(EBSError, ValueError):
    """A quantity is undefined for the given inputs (e.g. division by zero coupling)."""


class RegisterError(EBSError, KeyError):
    """Unknown, duplicate or wrongly-typed register."""

    def __str__(self) -> str:  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class DuplicateRegisterError(RegisterError):
    pass


class ConditioningError(EBSError, ValueError):
    """Cannot condition on a branch with zero weight."""


class UndefinedFidelityError(DomainError):
    pass


class ConfigError(EBSError, ValueError):
    pass


def check_finite(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def check_nonnegative(name: str, value) -> float:
    value = check_finite(name, value)
    if value < 0:
        raise InvalidParameterError(f"{name} must be >= 0, got {value!r}")
    return value


def check_unit_interval(name: str, value) -> float:
    value = check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def as_detuning(detuning):
    """Return a float for scalar input, a float ndarray otherwise; reject non-finite values."""
    arr = np.asarray(detuning, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("detuning must be finite")
    return float(arr) if arr.ndim == 0 else arr


def check_normalized(alpha: complex, beta: complex, atol: float = 1e-10) -> tuple[complex, complex]:
    alpha, beta = complex(alpha), complex(beta)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if not math.isfinite(norm) or abs(norm - 1.0) > atol:
        raise InvalidParameterError(f"|alpha|^2 + |beta|^2 must equal 1, got {norm!r}")
    return alpha, beta
