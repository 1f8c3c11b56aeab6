#!/usr/bin/env python
"""
E-MHA: multi-head attention built from bias-free yat projections.

Per head, logits = Θ_attn · Q Kᵀ with Θ_attn = (d_h / ln(1 + d_h))^attn_alpha
(d_h = per-head key dimension); rows are normalised by softermax under the
configured policy and applied to V. Heads are concatenated and passed
through the output projection. Inputs may be a single sequence (t, w) or a
batch (k, t, w).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.matrix import ensure_finite
from neural_matter_kit.nn.params import AttentionGrads, AttentionParams
from neural_matter_kit.nn.yat_dense import (
    YatDenseCache,
    yat_dense_apply,
    yat_dense_backward_cached,
)
from neural_matter_kit.yat.normalize import (
    SoftermaxPolicy,
    softermax,
    softermax_backward,
)
from neural_matter_kit.yat.products import ScaleMode, scale_base, scale_theta


@dataclass(frozen=True)
class AttentionCache:
    squeeze: bool
    cache_q: YatDenseCache
    cache_k: YatDenseCache
    cache_v: YatDenseCache
    cache_out: YatDenseCache
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    raw_logits: np.ndarray
    logits: np.ndarray
    weights: np.ndarray
    theta: float


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    k, t, w = x.shape
    return x.reshape(k, t, heads, w // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    k, h, t, d = x.shape
    return x.transpose(0, 2, 1, 3).reshape(k, t, h * d)


def attention_theta(head_dim: int, attn_alpha: float) -> float:
    return scale_theta(head_dim, attn_alpha, ScaleMode.INPUT_DIM)


def attention_weights(
    q: ArrayLike, k: ArrayLike, theta: float, policy: SoftermaxPolicy
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Softermax-normalised attention weights for already split heads.

    Args:
        q: Queries (..., t, d)
        k: Keys (..., s, d)
        theta: Logit scale
        policy: Softermax policy

    Returns:
        Tuple of (weights (..., t, s), logits (..., t, s))
    """
    logits = theta * np.einsum("...td,...sd->...ts", np.asarray(q), np.asarray(k))
    return softermax(logits, policy), logits


def scaled_attention(
    q: ArrayLike,
    k: ArrayLike,
    v: ArrayLike,
    heads: int,
    attn_alpha: float,
    policy: SoftermaxPolicy = SoftermaxPolicy.CLAMP_SHIFT,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    The attention core on given Q, K, V of shape (t, w).

    Returns:
        Tuple of (concatenated head outputs (t, w), weights (heads, t, t))
    """
    queries, keys, values = (np.asarray(a, dtype=np.float64)[None] for a in (q, k, v))
    if queries.shape[-1] % heads:
        raise ShapeError(f"width {queries.shape[-1]} is not divisible by {heads} heads")
    theta = attention_theta(queries.shape[-1] // heads, attn_alpha)
    weights, _ = attention_weights(
        _split_heads(queries, heads), _split_heads(keys, heads), theta, policy
    )
    out = np.einsum("khts,khsd->khtd", weights, _split_heads(values, heads))
    return _merge_heads(out)[0], weights[0]


def e_mha_apply(
    x: ArrayLike, params: AttentionParams
) -> Tuple[np.ndarray, AttentionCache]:
    inputs = np.asarray(x, dtype=np.float64)
    squeeze = inputs.ndim == 2
    if squeeze:
        inputs = inputs[None]
    if inputs.ndim != 3 or inputs.shape[-1] != params.width:
        raise ShapeError(
            f"e_mha expects (t, {params.width}) or (k, t, {params.width}), "
            f"got {inputs.shape}"
        )
    ensure_finite(inputs, "attention input")
    batch, tokens, width = inputs.shape
    flat = inputs.reshape(batch * tokens, width)

    q_flat, cache_q = yat_dense_apply(flat, params.proj_q)
    k_flat, cache_k = yat_dense_apply(flat, params.proj_k)
    v_flat, cache_v = yat_dense_apply(flat, params.proj_v)
    q = _split_heads(q_flat.reshape(batch, tokens, width), params.heads)
    k = _split_heads(k_flat.reshape(batch, tokens, width), params.heads)
    v = _split_heads(v_flat.reshape(batch, tokens, width), params.heads)

    theta = attention_theta(params.head_dim, params.attn_alpha)
    raw = np.einsum("khtd,khsd->khts", q, k)
    logits = theta * raw
    weights = softermax(logits, params.softermax_policy)
    heads_out = np.einsum("khts,khsd->khtd", weights, v)
    merged = _merge_heads(heads_out).reshape(batch * tokens, width)
    out_flat, cache_out = yat_dense_apply(merged, params.proj_out)
    out = out_flat.reshape(batch, tokens, width)

    cache = AttentionCache(
        squeeze,
        cache_q,
        cache_k,
        cache_v,
        cache_out,
        q,
        k,
        v,
        raw,
        logits,
        weights,
        theta,
    )
    return (out[0] if squeeze else out), cache


def e_mha(x: ArrayLike, params: AttentionParams) -> np.ndarray:
    """
    Apply E-MHA.

    Args:
        x: Sequence (t, w) or batch (k, t, w)
        params: Attention parameters

    Returns:
        Array with the shape of x

    Raises:
        ShapeError: On a width mismatch
        DomainError: STRICT policy with a negative logit
    """
    out, _ = e_mha_apply(x, params)
    return out


def e_mha_backward_cached(
    cache: AttentionCache, params: AttentionParams, upstream: ArrayLike
) -> AttentionGrads:
    grad = np.asarray(upstream, dtype=np.float64)
    if cache.squeeze:
        grad = grad[None]
    batch, tokens, width = grad.shape
    g_out = yat_dense_backward_cached(
        cache.cache_out, params.proj_out, grad.reshape(batch * tokens, width)
    )
    g_heads = _split_heads(g_out.x.reshape(batch, tokens, width), params.heads)

    g_weights = np.einsum("khtd,khsd->khts", g_heads, cache.v)
    g_v = np.einsum("khts,khtd->khsd", cache.weights, g_heads)
    g_logits = softermax_backward(
        cache.logits, cache.weights, g_weights, params.softermax_policy
    )
    g_q = cache.theta * np.einsum("khts,khsd->khtd", g_logits, cache.k)
    g_k = cache.theta * np.einsum("khts,khtd->khsd", g_logits, cache.q)
    g_theta = float(np.sum(g_logits * cache.raw_logits))
    log_base = float(np.log(scale_base(params.head_dim, ScaleMode.INPUT_DIM)))
    g_attn_alpha = g_theta * cache.theta * log_base

    def flat(a: np.ndarray) -> np.ndarray:
        return _merge_heads(a).reshape(batch * tokens, width)

    g_proj_q = yat_dense_backward_cached(cache.cache_q, params.proj_q, flat(g_q))
    g_proj_k = yat_dense_backward_cached(cache.cache_k, params.proj_k, flat(g_k))
    g_proj_v = yat_dense_backward_cached(cache.cache_v, params.proj_v, flat(g_v))
    g_x = (g_proj_q.x + g_proj_k.x + g_proj_v.x).reshape(batch, tokens, width)
    return AttentionGrads(
        proj_q=g_proj_q,
        proj_k=g_proj_k,
        proj_v=g_proj_v,
        proj_out=g_out,
        attn_alpha=g_attn_alpha,
        x=g_x[0] if cache.squeeze else g_x,
    )


def e_mha_backward(
    x: ArrayLike, params: AttentionParams, upstream: ArrayLike
) -> AttentionGrads:
    """Analytic gradients of sum(upstream ⊙ e_mha(x, params))."""
    _, cache = e_mha_apply(x, params)
    return e_mha_backward_cached(cache, params, upstream)
