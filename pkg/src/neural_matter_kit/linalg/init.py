#!/usr/bin/env python
"""
Weight initializers.
"""

from typing import Tuple

import numpy as np

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.matrix import Matrix
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix


def orthogonal_init(rows: int, cols: int, state: RngState) -> Tuple[Matrix, RngState]:
    """
    Orthogonal initializer via QR of a Gaussian matrix.

    When rows <= cols the rows of the result are orthonormal, otherwise the
    columns are. The R-diagonal sign correction makes the draw uniform over
    the orthogonal group.

    Args:
        rows: Output rows (neurons)
        cols: Output columns (inputs)
        state: RNG state

    Returns:
        Tuple of (rows×cols matrix, advanced state)

    Raises:
        DomainError: If rows or cols is below 1
    """
    if rows < 1 or cols < 1:
        raise DomainError(f"orthogonal_init needs rows, cols >= 1, got {rows}x{cols}")
    tall, short = max(rows, cols), min(rows, cols)
    gaussian, state = rng_normal_matrix(state, tall, short)
    q, r = np.linalg.qr(gaussian)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    result = q.T if rows < cols else q
    return np.ascontiguousarray(result, dtype=np.float64), state
