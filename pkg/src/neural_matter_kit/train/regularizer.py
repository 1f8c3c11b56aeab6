#!/usr/bin/env python
"""
E-regularizer: mean yat similarity over unordered pairs of kernel rows.

    R(W) = (1/P) Σ_{i<j} (w_i·w_j)² / (ε + ‖w_i − w_j‖²),   P = m(m−1)/2

It is zero exactly when the rows are pairwise orthogonal.
"""

from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.linalg.matrix import Matrix, as_matrix, row_norms_squared
from neural_matter_kit.yat.products import DEFAULT_EPSILON, pairwise_yat_matrix


def _pairs(m: int) -> int:
    return m * (m - 1) // 2


def e_regularizer_penalty(kernel: ArrayLike, epsilon: float = DEFAULT_EPSILON) -> float:
    """
    Mean pairwise yat similarity of the kernel rows.

    Args:
        kernel: m×n kernel
        epsilon: Stabiliser, positive

    Returns:
        Non-negative penalty; 0.0 for fewer than 2 rows
    """
    w = as_matrix(kernel, "kernel")
    m = w.shape[0]
    if m < 2:
        return 0.0
    similarity = pairwise_yat_matrix(w, epsilon)
    upper = similarity[np.triu_indices(m, k=1)]
    return float(upper.sum() / _pairs(m))


def e_regularizer(
    kernel: ArrayLike, epsilon: float = DEFAULT_EPSILON
) -> Tuple[float, Matrix]:
    """
    Penalty and its analytic gradient w.r.t. the kernel.

    Per pair with d = w_i·w_j and D = ε + ‖w_i − w_j‖²:
        ∂/∂w_i = w_j (2d/D + 2d²/D²) − w_i (2d²/D²)

    Returns:
        Tuple of (penalty, m×n gradient)
    """
    w = as_matrix(kernel, "kernel")
    m = w.shape[0]
    if m < 2:
        return 0.0, np.zeros_like(w)
    norms = row_norms_squared(w)
    gram = w @ w.T
    denom = epsilon + np.clip(norms[:, None] + norms[None, :] - 2.0 * gram, 0.0, None)
    ratio = gram / denom
    off = ~np.eye(m, dtype=bool)
    pull = np.where(off, 2.0 * ratio + 2.0 * ratio**2, 0.0)
    push = np.where(off, 2.0 * ratio**2, 0.0)
    grad = (pull @ w - push.sum(axis=1)[:, None] * w) / _pairs(m)
    return e_regularizer_penalty(w, epsilon), grad
