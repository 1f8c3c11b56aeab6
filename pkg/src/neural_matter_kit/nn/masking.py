#!/usr/bin/env python
"""
Random token masking: x'_i = M_i · [MASK] + (1 − M_i) · x_i with M_i ~ Bernoulli(p).
"""

from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.rng import DrawKind, RngState, rng_draw
from neural_matter_kit.nn.params import MaskingConfig


def token_mask(
    x: ArrayLike, cfg: MaskingConfig, state: RngState, training: bool
) -> Tuple[np.ndarray, np.ndarray, RngState]:
    """
    Replace tokens by the mask token with probability p.

    Args:
        x: Tokens (t, w) or a batch (k, t, w)
        cfg: Masking ratio and mask token of length w
        state: RNG state
        training: Identity with an all-zero mask when False

    Returns:
        Tuple of (masked tokens, binary mask over tokens, advanced state)

    Raises:
        ShapeError: If the mask token length differs from w
    """
    tokens = np.asarray(x, dtype=np.float64)
    if tokens.shape[-1] != cfg.mask_token.shape[0]:
        raise ShapeError(
            f"mask_token has length {cfg.mask_token.shape[0]}, "
            f"tokens have width {tokens.shape[-1]}"
        )
    mask_shape = tokens.shape[:-1]
    if not training or cfg.p == 0.0:
        return tokens.copy(), np.zeros(mask_shape, dtype=np.float64), state
    count = int(np.prod(mask_shape))
    draws, state = rng_draw(state, DrawKind.BERNOULLI, count, p=cfg.p)
    mask = draws.reshape(mask_shape)
    masked = np.where(mask[..., None] > 0.0, cfg.mask_token, tokens)
    return masked, mask, state


def token_mask_backward(
    upstream: ArrayLike, mask: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradients of token masking.

    Returns:
        Tuple of (gradient w.r.t. the tokens, gradient w.r.t. the mask token)
    """
    grad = np.asarray(upstream, dtype=np.float64)
    keep = (1.0 - mask)[..., None]
    d_token = (grad * mask[..., None]).reshape(-1, grad.shape[-1]).sum(axis=0)
    return grad * keep, d_token
