#!/usr/bin/env python
"""
Inverted dropout: survivors are scaled by 1/(1 − rate) so inference is the identity.
"""

from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import DrawKind, RngState, rng_draw


def dropout_with_mask(
    a: ArrayLike, rate: float, state: RngState, training: bool
) -> Tuple[np.ndarray, np.ndarray, RngState]:
    """
    Dropout that also returns the scaling mask (0 or 1/(1 − rate) per entry).

    Raises:
        DomainError: If rate is outside [0, 1)
    """
    if not 0.0 <= rate < 1.0:
        raise DomainError(f"dropout rate must lie in [0, 1), got {rate}")
    values = np.asarray(a, dtype=np.float64)
    if not training or rate == 0.0:
        return values.copy(), np.ones_like(values), state
    keep, state = rng_draw(state, DrawKind.BERNOULLI, values.size, p=1.0 - rate)
    mask = keep.reshape(values.shape) / (1.0 - rate)
    return values * mask, mask, state


def dropout(
    a: ArrayLike, rate: float, state: RngState, training: bool
) -> Tuple[np.ndarray, RngState]:
    """
    Zero entries independently with probability rate during training.

    Args:
        a: Activations of any shape
        rate: Drop probability in [0, 1)
        state: RNG state
        training: Identity when False

    Returns:
        Tuple of (activations, advanced state)
    """
    out, _, state = dropout_with_mask(a, rate, state, training)
    return out, state
