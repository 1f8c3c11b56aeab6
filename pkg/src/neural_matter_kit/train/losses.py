#!/usr/bin/env python
"""
Losses over probability heads.

Probabilities below PROB_FLOOR are clamped before the logarithm; a clamped
term is constant, so it passes no gradient.
"""

from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.config.schema import Head
from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.yat.normalize import (
    SoftermaxPolicy,
    softermax,
    softermax_backward,
    softmax,
)

PROB_FLOOR = 1e-12
ROW_SUM_TOLERANCE = 1e-9


def _check_labels(labels: ArrayLike, rows: int, classes: int) -> np.ndarray:
    index = np.asarray(labels)
    if index.shape != (rows,):
        raise ShapeError(f"expected {rows} labels, got shape {index.shape}")
    if not np.issubdtype(index.dtype, np.integer):
        if not np.all(index == np.round(index)):
            raise DomainError("labels must be integer class indices")
        index = index.astype(np.int64)
    if rows and (index.min() < 0 or index.max() >= classes):
        raise DomainError(
            f"labels must lie in [0, {classes}), got [{index.min()}, {index.max()}]"
        )
    return index.astype(np.int64)


def cross_entropy(probs: ArrayLike, labels: ArrayLike) -> float:
    """
    Mean negative log-likelihood of the labelled class.

    Args:
        probs: k×C rows of probabilities, each summing to 1
        labels: k class indices

    Returns:
        mean of −ln(max(probs[row, label], 1e-12))

    Raises:
        DomainError: Label out of range, negative entries, or rows not summing to 1
        ShapeError: Shape mismatch
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2:
        raise ShapeError(f"probs must be k×C, got shape {p.shape}")
    index = _check_labels(labels, p.shape[0], p.shape[1])
    if p.shape[0] == 0:
        raise ShapeError("cross_entropy needs at least one row")
    if np.any(p < 0.0) or np.any(np.abs(p.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
        raise DomainError("probs rows must be non-negative and sum to 1")
    picked = p[np.arange(p.shape[0]), index]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def _picked_upstream(probs: np.ndarray, index: np.ndarray) -> np.ndarray:
    """∂loss/∂probs for the clamped mean NLL."""
    rows = probs.shape[0]
    picked = probs[np.arange(rows), index]
    upstream = np.zeros_like(probs)
    active = picked >= PROB_FLOOR
    safe = np.where(active, picked, 1.0)
    upstream[np.arange(rows), index] = np.where(active, -1.0 / (rows * safe), 0.0)
    return upstream


def softmax_cross_entropy(
    logits: ArrayLike, labels: ArrayLike
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Cross-entropy of a softmax head.

    Returns:
        Tuple of (loss, gradient w.r.t. the logits, probabilities)
    """
    z = np.asarray(logits, dtype=np.float64)
    probs = softmax(z)
    index = _check_labels(labels, z.shape[0], z.shape[1])
    loss = cross_entropy(probs, index)
    rows = z.shape[0]
    onehot = np.zeros_like(probs)
    onehot[np.arange(rows), index] = 1.0
    grad = (probs - onehot) / rows
    clamped = probs[np.arange(rows), index] < PROB_FLOOR
    grad[clamped] = 0.0
    return loss, grad, probs


def softermax_cross_entropy(
    logits: ArrayLike,
    labels: ArrayLike,
    policy: SoftermaxPolicy = SoftermaxPolicy.STRICT,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Cross-entropy of a softermax head.

    Returns:
        Tuple of (loss, gradient w.r.t. the logits, probabilities)

    Raises:
        DomainError: STRICT policy with a negative logit
    """
    z = np.asarray(logits, dtype=np.float64)
    probs = softermax(z, policy)
    index = _check_labels(labels, z.shape[0], z.shape[1])
    loss = cross_entropy(probs, index)
    grad = softermax_backward(z, probs, _picked_upstream(probs, index), policy)
    return loss, grad, probs


def head_cross_entropy(
    logits: ArrayLike,
    labels: ArrayLike,
    head: Head,
    policy: SoftermaxPolicy = SoftermaxPolicy.STRICT,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Dispatch to the softmax or softermax cross-entropy."""
    if Head(head) == Head.SOFTERMAX:
        return softermax_cross_entropy(logits, labels, policy)
    return softmax_cross_entropy(logits, labels)


def mse_loss(predictions: ArrayLike, targets: ArrayLike) -> Tuple[float, np.ndarray]:
    """
    Mean squared error over all entries.

    Returns:
        Tuple of (loss, gradient w.r.t. the predictions)

    Raises:
        ShapeError: Shape mismatch
    """
    pred = np.asarray(predictions, dtype=np.float64)
    target = np.asarray(targets, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"predictions {pred.shape} and targets {target.shape} differ")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / max(diff.size, 1)
