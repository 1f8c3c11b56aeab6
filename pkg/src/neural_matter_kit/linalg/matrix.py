#!/usr/bin/env python
"""
Dense matrix helpers.

A Matrix is a 2-D, C-contiguous numpy array of float64. Functions here
validate shapes and finiteness at the boundaries of public operations;
the arithmetic itself is plain numpy.
"""

import logging
from typing import Mapping, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from neural_matter_kit.errors import NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]
Vector = NDArray[np.float64]


def as_matrix(data: ArrayLike, name: str = "matrix") -> Matrix:
    """
    Convert array-like data to a validated float64 matrix.

    Args:
        data: Nested sequences or an array of rank 2
        name: Tensor name used in error messages

    Returns:
        C-contiguous float64 array of rank 2

    Raises:
        ShapeError: If the data is not rank 2
        NonFiniteError: If any entry is NaN or Inf
    """
    array = np.ascontiguousarray(data, dtype=np.float64)
    if array.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {array.shape}")
    ensure_finite(array, name)
    return array


def as_vector(data: ArrayLike, name: str = "vector") -> Vector:
    """Convert array-like data to a validated, finite float64 vector."""
    array = np.ascontiguousarray(data, dtype=np.float64)
    if array.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {array.shape}")
    ensure_finite(array, name)
    return array


def ensure_finite(array: NDArray[np.float64], name: str) -> None:
    """Raise NonFiniteError naming the tensor when it holds NaN or Inf."""
    if not np.all(np.isfinite(array)):
        bad = int(np.size(array) - np.count_nonzero(np.isfinite(array)))
        raise NonFiniteError(name, f"{bad} of {np.size(array)} entries")


def ensure_all_finite(tensors: Mapping[str, NDArray[np.float64]]) -> None:
    """Check a named collection in iteration order; the first offender is reported."""
    for name, value in tensors.items():
        ensure_finite(np.asarray(value), name)


def mat_mul(a: ArrayLike, b: ArrayLike) -> Matrix:
    """
    Multiply two matrices.

    Args:
        a: Matrix of shape k×n
        b: Matrix of shape n×m

    Returns:
        Matrix of shape k×m

    Raises:
        ShapeError: If a.cols != b.rows
    """
    left = as_matrix(a, "A")
    right = as_matrix(b, "B")
    if left.shape[1] != right.shape[0]:
        raise ShapeError(
            f"Cannot multiply {left.shape[0]}x{left.shape[1]} by "
            f"{right.shape[0]}x{right.shape[1]}"
        )
    product = left @ right
    ensure_finite(product, "A @ B")
    return product


def row_norms_squared(x: Union[Matrix, NDArray[np.float64]]) -> NDArray[np.float64]:
    """Squared Euclidean norm of every row (last axis)."""
    return np.einsum("...i,...i->...", x, x)


