#!/usr/bin/env python
"""
Probability heads: softmax and softermax.

softermax(x)_i = (1 + x_i) / Σ_j (1 + x_j), defined for x >= 0 (STRICT).
The CLAMP_SHIFT policy accepts any finite input by clamping each shifted
term at zero and falls back to the uniform vector when every term clamps.
"""

from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.linalg.matrix import ensure_finite


class SoftermaxPolicy(str, Enum):
    STRICT = "strict"
    CLAMP_SHIFT = "clamp_shift"


def _as_logits(x: ArrayLike) -> NDArray[np.float64]:
    logits = np.asarray(x, dtype=np.float64)
    if logits.ndim == 0 or logits.shape[-1] == 0:
        raise ShapeError("softmax / softermax need a non-empty last axis")
    ensure_finite(logits, "logits")
    return logits


def softermax(
    x: ArrayLike, policy: SoftermaxPolicy = SoftermaxPolicy.STRICT
) -> NDArray[np.float64]:
    """
    Normalise the last axis with the additive-shift rule.

    Args:
        x: Vector (or stack of vectors along the last axis)
        policy: STRICT rejects negative entries, CLAMP_SHIFT clamps

    Returns:
        Array of the same shape whose last axis sums to 1

    Raises:
        DomainError: STRICT policy with a negative entry
        ShapeError: Empty input
    """
    logits = _as_logits(x)
    policy = SoftermaxPolicy(policy)
    if policy is SoftermaxPolicy.STRICT:
        if np.any(logits < 0.0):
            raise DomainError(
                f"softermax (strict) needs non-negative inputs, min is {logits.min()}"
            )
        shifted = 1.0 + logits
    else:
        shifted = np.maximum(0.0, 1.0 + logits)
    totals = shifted.sum(axis=-1, keepdims=True)
    n = logits.shape[-1]
    safe = np.where(totals > 0.0, totals, 1.0)
    return np.where(totals > 0.0, shifted / safe, 1.0 / n)


def softermax_backward(
    x: ArrayLike,
    probs: NDArray[np.float64],
    upstream: NDArray[np.float64],
    policy: SoftermaxPolicy = SoftermaxPolicy.STRICT,
) -> NDArray[np.float64]:
    """
    Vector-Jacobian product of softermax along the last axis.

    With t = shifted terms and S = Σ t, ∂p_i/∂t_j = (δ_ij − p_i)/S; clamped
    terms (and rows that fell back to uniform) pass no gradient.
    """
    logits = np.asarray(x, dtype=np.float64)
    shifted = 1.0 + logits
    if SoftermaxPolicy(policy) is SoftermaxPolicy.CLAMP_SHIFT:
        active = shifted > 0.0
        shifted = np.where(active, shifted, 0.0)
    else:
        active = np.ones_like(shifted, dtype=bool)
    totals = shifted.sum(axis=-1, keepdims=True)
    safe = np.where(totals > 0.0, totals, 1.0)
    inner = np.sum(upstream * probs, axis=-1, keepdims=True)
    grad = (upstream - inner) / safe
    return np.where(active & (totals > 0.0), grad, 0.0)


def softmax(x: ArrayLike) -> NDArray[np.float64]:
    """
    Numerically stable softmax along the last axis (max subtraction).

    Raises:
        ShapeError: Empty input
    """
    logits = _as_logits(x)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)
