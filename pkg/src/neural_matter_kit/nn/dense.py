#!/usr/bin/env python
"""
Traditional affine layer Y = f(X Wᵀ + b) with ReLU, exact GeLU or no activation.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import erf

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.matrix import Matrix, as_matrix
from neural_matter_kit.nn.params import Activation, DenseGrads, DenseParams

_SQRT_2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    activation = Activation(activation)
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.GELU:
        return 0.5 * z * (1.0 + erf(z / _SQRT_2))
    return z


def activate_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    activation = Activation(activation)
    if activation is Activation.RELU:
        return (z > 0.0).astype(np.float64)
    if activation is Activation.GELU:
        cdf = 0.5 * (1.0 + erf(z / _SQRT_2))
        return cdf + z * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return np.ones_like(z)


@dataclass(frozen=True)
class DenseCache:
    x: Matrix
    pre_activation: Matrix


def dense_apply(x: ArrayLike, params: DenseParams) -> tuple[Matrix, DenseCache]:
    inputs = as_matrix(x, "X")
    if inputs.shape[1] != params.weight.shape[1]:
        raise ShapeError(
            f"input has {inputs.shape[1]} columns, "
            f"weight expects {params.weight.shape[1]}"
        )
    z = inputs @ params.weight.T + params.bias
    return activate(z, params.activation), DenseCache(inputs, z)


def dense_forward(x: ArrayLike, params: DenseParams) -> Matrix:
    """
    Apply the affine map and activation.

    Raises:
        ShapeError: If x has the wrong number of columns
    """
    out, _ = dense_apply(x, params)
    return out


def dense_backward_cached(
    cache: DenseCache, params: DenseParams, upstream: ArrayLike
) -> DenseGrads:
    grad_out = np.asarray(upstream, dtype=np.float64)
    if grad_out.shape != cache.pre_activation.shape:
        raise ShapeError(
            f"upstream shape {grad_out.shape} does not match output "
            f"{cache.pre_activation.shape}"
        )
    grad_z = grad_out * activate_grad(cache.pre_activation, params.activation)
    return DenseGrads(
        weight=grad_z.T @ cache.x,
        bias=grad_z.sum(axis=0),
        x=grad_z @ params.weight,
    )


def dense_backward(
    x: ArrayLike, params: DenseParams, upstream: ArrayLike
) -> DenseGrads:
    _, cache = dense_apply(x, params)
    return dense_backward_cached(cache, params, upstream)
