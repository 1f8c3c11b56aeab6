#!/usr/bin/env python
"""
Exception hierarchy for the Neural Matter Kit.

Every expected failure raised by the package derives from NmkError and from
the builtin exception a caller would naturally catch (ValueError for bad
shapes or arguments, OSError for unreadable files).
"""


class NmkError(Exception):
    """Base class for all package errors."""


class ShapeError(NmkError, ValueError):
    """Operand shapes are incompatible."""


class DomainError(NmkError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(NmkError, ValueError):
    """Too few rows / samples / neurons for the requested computation."""


class FormatError(NmkError, ValueError):
    """A file does not follow the expected binary or text format."""


class ConsistencyError(NmkError, ValueError):
    """Two inputs that must agree (e.g. image and label counts) do not."""


class NonFiniteError(NmkError, FloatingPointError):
    """A tensor contains NaN or Inf."""

    def __init__(self, tensor_name: str, detail: str = "") -> None:
        self.tensor_name = tensor_name
        message = f"Non-finite values in tensor '{tensor_name}'"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class DatasetIOError(NmkError, OSError):
    """A dataset file could not be read completely."""
