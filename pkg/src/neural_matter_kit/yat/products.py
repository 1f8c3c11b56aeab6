#!/usr/bin/env python
"""
The E-product (yat), its reciprocal Ē (posi-yat) and the layer scale Θ.

    E(a, b) = (a·b)² / (ε + ‖b − a‖²)
    Ē(a, b) = ‖b − a‖² / ((a·b)² + ε)

ε only ever enters a denominator.
"""

import math
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.linalg.matrix import Matrix, as_matrix, as_vector

DEFAULT_EPSILON = 1e-6


class ScaleMode(str, Enum):
    """Which Θ formula a layer uses."""
    INPUT_DIM = "input_dim"            # (n / ln(1+n))^α, n = input dimension
    SQRT_OUTPUTS = "sqrt_outputs"      # (√m / ln(1+m))^α, m = output feature count


class Measure(str, Enum):
    E = "e"
    EBAR = "ebar"


def _check_epsilon(epsilon: float) -> None:
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")


def _pair(
    e1: ArrayLike, e2: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    a = as_vector(e1, "e1")
    b = as_vector(e2, "e2")
    if a.shape != b.shape:
        raise ShapeError(f"Vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 1:
        raise ShapeError("Vectors must have at least one entry")
    return a, b


def yat_product(
    e1: ArrayLike, e2: ArrayLike, epsilon: float = DEFAULT_EPSILON
) -> float:
    """
    E-product of two vectors.

    Args:
        e1: First vector
        e2: Second vector of the same length
        epsilon: Positive stabiliser added to the squared distance

    Returns:
        Non-negative float

    Raises:
        ShapeError: If the lengths differ
        DomainError: If epsilon <= 0
    """
    _check_epsilon(epsilon)
    a, b = _pair(e1, e2)
    diff = b - a
    return float(np.dot(a, b) ** 2 / (epsilon + np.dot(diff, diff)))


def posi_yat_product(
    e1: ArrayLike, e2: ArrayLike, epsilon: float = DEFAULT_EPSILON
) -> float:
    """
    Ē-product of two vectors; zero exactly when e1 == e2.

    Raises:
        ShapeError: If the lengths differ
        DomainError: If epsilon <= 0
    """
    _check_epsilon(epsilon)
    a, b = _pair(e1, e2)
    diff = b - a
    return float(np.dot(diff, diff) / (np.dot(a, b) ** 2 + epsilon))


def cosine_similarity(e1: ArrayLike, e2: ArrayLike) -> float:
    a, b = _pair(e1, e2)
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.dot(a, b) / denom) if denom > 0.0 else 0.0


def yat_rows(
    a: NDArray[np.float64], b: NDArray[np.float64], epsilon: float
) -> NDArray[np.float64]:
    """Row-wise E-product of two equally shaped stacks of vectors."""
    dots = np.einsum("...i,...i->...", a, b)
    diff = b - a
    return dots**2 / (epsilon + np.einsum("...i,...i->...", diff, diff))


def posi_yat_rows(
    a: NDArray[np.float64], b: NDArray[np.float64], epsilon: float
) -> NDArray[np.float64]:
    """Row-wise Ē-product of two equally shaped stacks of vectors."""
    dots = np.einsum("...i,...i->...", a, b)
    diff = b - a
    return np.einsum("...i,...i->...", diff, diff) / (dots**2 + epsilon)


def measure_rows(
    measure: Measure,
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    epsilon: float,
) -> NDArray[np.float64]:
    if Measure(measure) is Measure.E:
        return yat_rows(a, b, epsilon)
    return posi_yat_rows(a, b, epsilon)


def measure_value(
    measure: Measure, a: ArrayLike, b: ArrayLike, epsilon: float
) -> float:
    if Measure(measure) is Measure.E:
        return yat_product(a, b, epsilon)
    return posi_yat_product(a, b, epsilon)


def scale_base(n: int, mode: ScaleMode = ScaleMode.INPUT_DIM) -> float:
    """The base of Θ before exponentiation by α."""
    if n < 1:
        raise DomainError(f"scale factor needs n >= 1, got {n}")
    if ScaleMode(mode) is ScaleMode.INPUT_DIM:
        return n / math.log1p(n)
    return math.sqrt(n) / math.log1p(n)


def scale_theta(n: int, alpha: float, mode: ScaleMode = ScaleMode.INPUT_DIM) -> float:
    """
    Layer scale factor Θ = base(n)^α.

    Args:
        n: Input dimension (INPUT_DIM) or output feature count (SQRT_OUTPUTS)
        alpha: Exponent, learnable in layers
        mode: Which formula to use

    Returns:
        Positive float; exactly 1.0 when alpha == 0

    Raises:
        DomainError: If n < 1
    """
    base = scale_base(n, mode)
    if alpha == 0:
        return 1.0
    return float(base**alpha)


def pairwise_yat_matrix(w: ArrayLike, epsilon: float = DEFAULT_EPSILON) -> Matrix:
    """
    Symmetric matrix of E-products between all rows of W.

    The diagonal equals ‖w_i‖⁴/ε.
    """
    _check_epsilon(epsilon)
    rows = as_matrix(w, "W")
    gram = rows @ rows.T
    gram = 0.5 * (gram + gram.T)
    sq = np.diag(gram).copy()
    dist = np.clip(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0, None)
    np.fill_diagonal(dist, 0.0)
    similarity = gram**2 / (epsilon + dist)
    return 0.5 * (similarity + similarity.T)
