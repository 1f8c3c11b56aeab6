#!/usr/bin/env python
"""
E-neuron dense layer.

    y[k, i] = Θ · (w_i·x_k)² / (ε + ‖x_k − w_i‖²) + b_i

The squared distance is expanded as ‖x‖² + ‖w‖² − 2 w·x so the layer never
materialises the k×m×n difference tensor. The backward pass differentiates
the quotient form directly:

    ∂E/∂w = x (2d/D + 2d²/D²) − w (2d²/D²)
    ∂E/∂x = w (2d/D + 2d²/D²) − x (2d²/D²)
    ∂Θ/∂α = Θ · ln(base)
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.matrix import Matrix, as_matrix, row_norms_squared
from neural_matter_kit.nn.params import YatDenseGrads, YatDenseParams
from neural_matter_kit.yat.products import scale_theta


@dataclass(frozen=True)
class YatDenseCache:
    x: Matrix
    dots: Matrix
    denom: Matrix
    similarity: Matrix
    theta: float


def _check_input(x: ArrayLike, params: YatDenseParams) -> Matrix:
    inputs = as_matrix(x, "X")
    if inputs.shape[1] != params.inputs:
        raise ShapeError(
            f"input has {inputs.shape[1]} columns, kernel expects {params.inputs}"
        )
    return inputs


def layer_theta(params: YatDenseParams) -> float:
    return scale_theta(params.scale_n(), params.alpha, params.scale_mode)


def yat_dense_apply(
    x: ArrayLike, params: YatDenseParams
) -> tuple[Matrix, YatDenseCache]:
    """Forward pass that also returns the intermediates the backward pass needs."""
    inputs = _check_input(x, params)
    kernel = params.kernel
    dots = inputs @ kernel.T
    sq_inputs = row_norms_squared(inputs)[:, None]
    dist = sq_inputs + row_norms_squared(kernel)[None, :] - 2.0 * dots
    denom = params.epsilon + np.clip(dist, 0.0, None)
    similarity = dots**2 / denom
    theta = layer_theta(params)
    out = theta * similarity
    if params.bias is not None:
        out = out + params.bias
    return out, YatDenseCache(inputs, dots, denom, similarity, theta)


def yat_dense_forward(x: ArrayLike, params: YatDenseParams) -> Matrix:
    """
    Apply an E-neuron layer to a batch.

    Args:
        x: Batch of shape k×n
        params: Layer parameters with an m×n kernel

    Returns:
        Output of shape k×m, non-negative when the layer has no bias

    Raises:
        ShapeError: If x has the wrong number of columns
    """
    out, _ = yat_dense_apply(x, params)
    return out


def yat_dense_backward_cached(
    cache: YatDenseCache, params: YatDenseParams, upstream: ArrayLike
) -> YatDenseGrads:
    grad_out = np.asarray(upstream, dtype=np.float64)
    if grad_out.shape != cache.dots.shape:
        raise ShapeError(
            f"upstream shape {grad_out.shape} does not match output {cache.dots.shape}"
        )
    ratio = cache.dots / cache.denom
    scaled = grad_out * cache.theta
    coef_pull = scaled * (2.0 * ratio + 2.0 * ratio**2)
    coef_self = scaled * (2.0 * ratio**2)

    d_kernel = coef_pull.T @ cache.x - coef_self.sum(axis=0)[:, None] * params.kernel
    d_x = coef_pull @ params.kernel - coef_self.sum(axis=1)[:, None] * cache.x
    d_alpha = float(
        np.sum(grad_out * cache.similarity) * cache.theta * params.log_base()
    )
    d_bias = grad_out.sum(axis=0) if params.bias is not None else None
    return YatDenseGrads(kernel=d_kernel, alpha=d_alpha, bias=d_bias, x=d_x)


def yat_dense_backward(
    x: ArrayLike, params: YatDenseParams, upstream: ArrayLike
) -> YatDenseGrads:
    """
    Analytic gradients of sum(upstream ⊙ yat_dense_forward(x, params)).

    Args:
        x: Batch of shape k×n used in the forward pass
        params: Layer parameters
        upstream: Gradient w.r.t. the k×m output

    Returns:
        YatDenseGrads with kernel, alpha, bias (None without bias) and x

    Raises:
        ShapeError: If shapes are inconsistent with the forward pass
    """
    _, cache = yat_dense_apply(x, params)
    return yat_dense_backward_cached(cache, params, upstream)
