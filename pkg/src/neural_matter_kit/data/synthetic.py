#!/usr/bin/env python
"""
Generated datasets: the four XOR points and Gaussian blobs.
"""

import logging
from typing import Tuple

import numpy as np

from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix

logger = logging.getLogger(__name__)

XOR_FEATURES = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
XOR_LABELS = (0, 1, 1, 0)


def xor_dataset() -> Dataset:
    """The XOR truth table as a two-class dataset."""
    return Dataset.from_arrays(XOR_FEATURES, XOR_LABELS, num_classes=2)


def blob_centers(classes: int, dim: int, separation: float) -> np.ndarray:
    """
    Deterministic class centers.

    Class c sits at ±separation along axis c mod dim (sign flips every dim
    classes); further rounds are pushed out along the all-ones diagonal.
    """
    centers = np.zeros((classes, dim))
    for c in range(classes):
        axis = c % dim
        sign = 1.0 if (c // dim) % 2 == 0 else -1.0
        centers[c, axis] = sign * separation
        centers[c] += (c // (2 * dim)) * 0.5 * separation
    return centers


def synthetic_blobs(
    classes: int,
    per_class: int,
    dim: int,
    spread: float,
    state: RngState,
    separation: float = 4.0,
    near_duplicate: bool = False,
    duplicate_offset: float = 0.05,
) -> Tuple[Dataset, RngState]:
    """
    Gaussian blobs around deterministic centers.

    Args:
        classes: Number of classes (at least 2)
        per_class: Samples per class
        dim: Feature dimension
        spread: Standard deviation of every blob
        state: RNG state
        separation: Distance of the centers from the origin
        near_duplicate: Move class 1 next to class 0 to provoke neuron collapse
        duplicate_offset: Distance between the duplicated centers, relative to
            separation

    Returns:
        Tuple of (class-major Dataset, advanced state)

    Raises:
        DomainError: On fewer than 2 classes, non-positive sizes or negative spread
    """
    if classes < 2:
        raise DomainError(f"synthetic_blobs needs at least 2 classes, got {classes}")
    if per_class < 1 or dim < 1:
        raise DomainError(
            f"per_class and dim must be positive, got {per_class} and {dim}"
        )
    if spread < 0.0:
        raise DomainError(f"spread must be non-negative, got {spread}")
    centers = blob_centers(classes, dim, separation)
    if near_duplicate:
        centers[1] = centers[0]
        centers[1, 1 % dim] += duplicate_offset * separation
    noise, state = rng_normal_matrix(state, classes * per_class, dim, spread)
    features = np.repeat(centers, per_class, axis=0) + noise
    labels = np.repeat(np.arange(classes, dtype=np.int64), per_class)
    logger.debug(
        f"Generated {classes}x{per_class} blobs in {dim} dimensions "
        f"(near_duplicate={near_duplicate})"
    )
    return Dataset(features, labels, classes), state
