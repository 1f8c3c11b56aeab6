#!/usr/bin/env python
"""
Patch embedding and global average pooling.

Patches are non-overlapping, taken in row-major patch order and flattened
row-major within the patch (row, column, channel).
"""

from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.errors import ShapeError
from neural_matter_kit.linalg.matrix import Matrix, Vector
from neural_matter_kit.nn.dense import dense_apply, dense_backward_cached
from neural_matter_kit.nn.params import (
    DenseGrads,
    DenseParams,
    YatDenseGrads,
    YatDenseParams,
)
from neural_matter_kit.nn.yat_dense import yat_dense_apply, yat_dense_backward_cached

ProjectionParams = Union[YatDenseParams, DenseParams]
ProjectionGrads = Union[YatDenseGrads, DenseGrads]


def _as_batch(images: np.ndarray) -> np.ndarray:
    """Return images as (k, H, W, C)."""
    if images.ndim == 3:
        return images[..., None]
    if images.ndim == 4:
        return images
    raise ShapeError(
        f"image batch must be (k, H, W) or (k, H, W, C), got {images.shape}"
    )


def extract_patches(images: ArrayLike, patch: int) -> np.ndarray:
    """
    Cut a batch of images into flattened patches.

    Args:
        images: Array (k, H, W) or (k, H, W, C)
        patch: Patch side length

    Returns:
        Array (k, tokens, patch·patch·C)

    Raises:
        ShapeError: If H or W is not divisible by patch
    """
    batch = _as_batch(np.asarray(images, dtype=np.float64))
    k, height, width, channels = batch.shape
    if patch < 1 or height % patch or width % patch:
        raise ShapeError(
            f"image {height}x{width} is not divisible into {patch}x{patch} patches"
        )
    gh, gw = height // patch, width // patch
    grid = batch.reshape(k, gh, patch, gw, patch, channels)
    blocks = grid.transpose(0, 1, 3, 2, 4, 5)
    return np.ascontiguousarray(blocks.reshape(k, gh * gw, patch * patch * channels))


def fold_patches(
    patches: np.ndarray, image_shape: Tuple[int, ...], patch: int
) -> np.ndarray:
    """Adjoint of extract_patches: scatter patch rows back to (k, *image_shape)."""
    height, width = image_shape[0], image_shape[1]
    channels = image_shape[2] if len(image_shape) == 3 else 1
    k = patches.shape[0]
    gh, gw = height // patch, width // patch
    grid = patches.reshape(k, gh, gw, patch, patch, channels)
    blocks = grid.transpose(0, 1, 3, 2, 4, 5)
    return blocks.reshape((k,) + tuple(image_shape))


def project(x: Matrix, params: ProjectionParams):
    if isinstance(params, YatDenseParams):
        return yat_dense_apply(x, params)
    return dense_apply(x, params)


def project_backward(
    cache, params: ProjectionParams, upstream: np.ndarray
) -> ProjectionGrads:
    if isinstance(params, YatDenseParams):
        return yat_dense_backward_cached(cache, params, upstream)
    return dense_backward_cached(cache, params, upstream)


def patch_embed(image: ArrayLike, patch: int, params: ProjectionParams) -> Matrix:
    """
    Embed one image as a token matrix.

    Args:
        image: Array H×W (grayscale) or H×W×C
        patch: Patch side length
        params: Yat or dense projection from patch·patch·C to the model width

    Returns:
        Matrix tokens×width with tokens = (H/patch)·(W/patch)

    Raises:
        ShapeError: On indivisible dimensions or a projection size mismatch
    """
    patches = extract_patches(np.asarray(image, dtype=np.float64)[None], patch)[0]
    tokens, _ = project(patches, params)
    return tokens


def patch_embed_backward(
    image: ArrayLike, patch: int, params: ProjectionParams, upstream: ArrayLike
) -> Tuple[ProjectionGrads, np.ndarray]:
    """Gradients of sum(upstream ⊙ patch_embed(...)) w.r.t. projection and image."""
    pixels = np.asarray(image, dtype=np.float64)
    patches = extract_patches(pixels[None], patch)[0]
    _, cache = project(patches, params)
    grads = project_backward(cache, params, np.asarray(upstream, dtype=np.float64))
    d_image = fold_patches(grads.x[None], pixels.shape, patch)[0]
    return grads, d_image


def global_avg_pool(tokens: ArrayLike) -> Vector:
    """
    Column-wise mean over the token axis (axis −2); works on (t, w) and (k, t, w).

    Raises:
        ShapeError: If there are no tokens
    """
    values = np.asarray(tokens, dtype=np.float64)
    if values.ndim < 2 or values.shape[-2] == 0:
        raise ShapeError(
            f"global_avg_pool needs at least one token, got shape {values.shape}"
        )
    return values.mean(axis=-2)


def global_avg_pool_backward(upstream: ArrayLike, tokens: int) -> np.ndarray:
    grad = np.asarray(upstream, dtype=np.float64)
    return np.repeat(grad[..., None, :], tokens, axis=-2) / tokens
