from __future__ import annotations

from typing import Any


class QigWarning(UserWarning):
    """Advisory raised by the library; never affects a returned value."""


class QigError(Exception):
    pass


class QigValidationError(QigError, ValueError):
    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field


class DomainError(QigError, ValueError):
    """An eigenvalue (or support condition) falls outside a function's domain."""

    def __init__(self, message: str, *, value: Any = None):
        super().__init__(message)
        self.value = value


class ConvergenceError(QigError, RuntimeError):
    def __init__(
        self,
        message: str,
        *,
        best_value: float | None = None,
        gradient_norm: float | None = None,
        iterations: int | None = None,
    ):
        super().__init__(message)
        self.best_value = best_value
        self.gradient_norm = gradient_norm
        self.iterations = iterations
