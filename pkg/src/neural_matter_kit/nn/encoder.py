#!/usr/bin/env python
"""
E-ViT encoder block and the additive positional table.

Block layout (no normalisation layers):

    m = token_mask(x)
    h = m + e_mha(m)
    y = h + ffn_out(ffn_in(h))

Both feed-forward layers are bias-free yat layers.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.matrix import Vector
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nn.attention import (
    AttentionCache,
    e_mha_apply,
    e_mha_backward_cached,
)
from neural_matter_kit.nn.masking import token_mask, token_mask_backward
from neural_matter_kit.nn.params import (
    AttentionGrads,
    AttentionParams,
    MaskingConfig,
    YatDenseGrads,
    YatDenseParams,
)
from neural_matter_kit.nn.yat_dense import (
    YatDenseCache,
    yat_dense_apply,
    yat_dense_backward_cached,
)


@dataclass(frozen=True)
class EncoderParams:
    attention: AttentionParams
    ffn_in: YatDenseParams
    ffn_out: YatDenseParams
    masking: MaskingConfig

    def __post_init__(self) -> None:
        width = self.attention.width
        ffn_in, ffn_out = self.ffn_in, self.ffn_out
        if ffn_in.inputs != width or ffn_out.neurons != width:
            raise ShapeError(
                f"feed-forward {ffn_in.inputs}->{ffn_in.neurons}->{ffn_out.neurons} "
                f"does not fit model width {width}"
            )
        if ffn_out.inputs != ffn_in.neurons:
            raise ShapeError(
                f"ffn_out expects {ffn_out.inputs} inputs, "
                f"ffn_in gives {ffn_in.neurons}"
            )
        token_length = self.masking.mask_token.shape[0]
        if token_length != width:
            raise ShapeError(
                f"mask_token length {token_length} != model width {width}"
            )


@dataclass(frozen=True)
class EncoderGrads:
    attention: AttentionGrads
    ffn_in: YatDenseGrads
    ffn_out: YatDenseGrads
    mask_token: Vector
    x: np.ndarray


@dataclass(frozen=True)
class EncoderCache:
    squeeze: bool
    mask: np.ndarray
    attention: AttentionCache
    ffn_in: YatDenseCache
    ffn_out: YatDenseCache


def encoder_block_apply(
    x: ArrayLike, params: EncoderParams, state: RngState, training: bool = False
) -> Tuple[np.ndarray, EncoderCache, RngState]:
    """
    Run one encoder block.

    Args:
        x: Tokens (t, w) or a batch (k, t, w)
        params: Block parameters
        state: RNG state for token masking
        training: Token masking is only active in training mode

    Returns:
        Tuple of (output with the shape of x, cache for the backward pass,
        advanced state)
    """
    tokens = np.asarray(x, dtype=np.float64)
    squeeze = tokens.ndim == 2
    if squeeze:
        tokens = tokens[None]
    if tokens.ndim != 3:
        raise ShapeError(
            f"encoder block expects (t, w) or (k, t, w), got {tokens.shape}"
        )
    masked, mask, state = token_mask(tokens, params.masking, state, training)
    attended, attn_cache = e_mha_apply(masked, params.attention)
    hidden = masked + attended
    batch, count, width = hidden.shape
    flat = hidden.reshape(batch * count, width)
    inner, cache_in = yat_dense_apply(flat, params.ffn_in)
    outer, cache_out = yat_dense_apply(inner, params.ffn_out)
    out = hidden + outer.reshape(batch, count, width)
    cache = EncoderCache(squeeze, mask, attn_cache, cache_in, cache_out)
    return (out[0] if squeeze else out), cache, state


def encoder_block_backward(
    cache: EncoderCache, params: EncoderParams, upstream: ArrayLike
) -> EncoderGrads:
    """Analytic gradients of sum(upstream ⊙ block output) for the cached pass."""
    grad = np.asarray(upstream, dtype=np.float64)
    if cache.squeeze:
        grad = grad[None]
    batch, count, width = grad.shape
    flat = grad.reshape(batch * count, width)
    g_out = yat_dense_backward_cached(cache.ffn_out, params.ffn_out, flat)
    g_in = yat_dense_backward_cached(cache.ffn_in, params.ffn_in, g_out.x)
    g_hidden = grad + g_in.x.reshape(batch, count, width)
    g_attn = e_mha_backward_cached(cache.attention, params.attention, g_hidden)
    g_masked = g_hidden + g_attn.x
    g_x, g_token = token_mask_backward(g_masked, cache.mask)
    return EncoderGrads(
        attention=g_attn,
        ffn_in=g_in,
        ffn_out=g_out,
        mask_token=g_token,
        x=g_x[0] if cache.squeeze else g_x,
    )


def encoder_block(x: ArrayLike, params: EncoderParams) -> np.ndarray:
    """Inference-mode block output (token masking off)."""
    out, _, _ = encoder_block_apply(x, params, RngState(0), training=False)
    return out


def add_positions(tokens: ArrayLike, table: ArrayLike) -> np.ndarray:
    """
    Add a learnable (t, w) positional table to every sequence of a batch.

    Raises:
        ShapeError: If the table does not match the trailing (t, w) shape
    """
    values = np.asarray(tokens, dtype=np.float64)
    positions = np.asarray(table, dtype=np.float64)
    if values.shape[-2:] != positions.shape:
        raise ShapeError(
            f"positional table {positions.shape} does not match tokens {values.shape}"
        )
    return values + positions


def add_positions_backward(upstream: ArrayLike) -> np.ndarray:
    """Gradient of the positional table: the upstream summed over the batch axis."""
    grad = np.asarray(upstream, dtype=np.float64)
    return grad.reshape((-1,) + grad.shape[-2:]).sum(axis=0)
