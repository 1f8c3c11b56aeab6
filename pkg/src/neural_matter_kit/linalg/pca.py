#!/usr/bin/env python
"""
Two-component principal component analysis.

The covariance matrix is decomposed with numpy's symmetric eigensolver
(LAPACK syevd), which converges far below the 1e-12 off-diagonal target for
the small covariance sizes used here.
"""

import logging
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import InsufficientDataError
from neural_matter_kit.linalg.matrix import Matrix, as_matrix

logger = logging.getLogger(__name__)


def principal_axes(
    x: ArrayLike, components: int = 2
) -> Tuple[Matrix, np.ndarray, float]:
    """
    Leading principal axes of the row cloud.

    Each axis is sign-normalised so that its largest-magnitude loading is
    positive (first occurrence wins on ties).

    Returns:
        Tuple of (n×components axes, leading eigenvalues, total variance)
    """
    data = as_matrix(x, "X")
    centered = data - data.mean(axis=0)
    covariance = centered.T @ centered / max(data.shape[0] - 1, 1)
    covariance = 0.5 * (covariance + covariance.T)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]

    k = min(components, data.shape[1])
    axes = np.zeros((data.shape[1], components), dtype=np.float64)
    for j in range(k):
        axis = eigenvectors[:, j]
        pivot = int(np.argmax(np.abs(axis)))
        axes[:, j] = axis if axis[pivot] >= 0 else -axis
    leading = np.zeros(components, dtype=np.float64)
    leading[:k] = eigenvalues[:k]
    return axes, leading, float(eigenvalues.sum())


def pca_2d(x: ArrayLike) -> Tuple[Matrix, Tuple[float, float]]:
    """
    Project rows onto the top-2 covariance eigenvectors.

    Args:
        x: Matrix of shape m×n with m >= 2

    Returns:
        Tuple of (m×2 projected points, (explained_1, explained_2))

    Raises:
        InsufficientDataError: If fewer than two rows are given
    """
    data = as_matrix(x, "X")
    if data.shape[0] < 2:
        raise InsufficientDataError(
            f"pca_2d needs at least 2 rows, got {data.shape[0]}"
        )
    axes, leading, total = principal_axes(data, 2)
    points = (data - data.mean(axis=0)) @ axes
    if total <= 0.0:
        logger.debug("pca_2d on a degenerate point cloud (zero variance)")
        return points, (0.0, 0.0)
    ratios = np.clip(leading / total, 0.0, 1.0)
    return np.ascontiguousarray(points), (float(ratios[0]), float(ratios[1]))
