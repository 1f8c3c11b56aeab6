#!/usr/bin/env python
"""
Parameter value types for the layers.

These are frozen dataclasses holding numpy arrays; they are rebuilt, not
mutated, when an optimizer produces new values.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from neural_matter_kit.config.schema import Activation
from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.linalg.matrix import Matrix, Vector, ensure_finite
from neural_matter_kit.yat.normalize import SoftermaxPolicy
from neural_matter_kit.yat.products import DEFAULT_EPSILON, ScaleMode, scale_base


@dataclass(frozen=True)
class YatDenseParams:
    """One E-neuron layer: m neurons over n inputs."""
    kernel: Matrix
    alpha: float = 1.0
    bias: Optional[Vector] = None
    epsilon: float = DEFAULT_EPSILON
    scale_mode: ScaleMode = ScaleMode.INPUT_DIM

    def __post_init__(self) -> None:
        if self.kernel.ndim != 2:
            raise ShapeError(f"kernel must be 2-D, got shape {self.kernel.shape}")
        ensure_finite(self.kernel, "kernel")
        if not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.bias is not None and self.bias.shape != (self.kernel.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match "
                f"{self.kernel.shape[0]} neurons"
            )

    @property
    def neurons(self) -> int:
        return int(self.kernel.shape[0])

    @property
    def inputs(self) -> int:
        return int(self.kernel.shape[1])

    def scale_n(self) -> int:
        """The n that enters Θ: input dimension or output feature count."""
        if ScaleMode(self.scale_mode) is ScaleMode.INPUT_DIM:
            return self.inputs
        return self.neurons

    def log_base(self) -> float:
        return float(np.log(scale_base(self.scale_n(), self.scale_mode)))


@dataclass(frozen=True)
class YatDenseGrads:
    kernel: Matrix
    alpha: float
    bias: Optional[Vector]
    x: Matrix


@dataclass(frozen=True)
class DenseParams:
    """Traditional affine layer followed by an activation."""
    weight: Matrix
    bias: Vector
    activation: Activation = Activation.NONE

    def __post_init__(self) -> None:
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(
                f"weight {self.weight.shape} and bias {self.bias.shape} do not match"
            )
        ensure_finite(self.weight, "weight")
        ensure_finite(self.bias, "bias")


@dataclass(frozen=True)
class DenseGrads:
    weight: Matrix
    bias: Vector
    x: Matrix


@dataclass(frozen=True)
class AttentionParams:
    """E-MHA: four bias-free yat projections and a learnable logit scale exponent."""
    proj_q: YatDenseParams
    proj_k: YatDenseParams
    proj_v: YatDenseParams
    proj_out: YatDenseParams
    heads: int
    attn_alpha: float = 1.0
    softermax_policy: SoftermaxPolicy = SoftermaxPolicy.CLAMP_SHIFT

    def __post_init__(self) -> None:
        width = self.proj_q.inputs
        if self.heads < 1 or width % self.heads != 0:
            raise ShapeError(
                f"model width {width} is not divisible by {self.heads} heads"
            )
        for name in ("proj_q", "proj_k", "proj_v", "proj_out"):
            proj: YatDenseParams = getattr(self, name)
            if proj.kernel.shape != (width, width):
                raise ShapeError(
                    f"{name} must be {width}x{width}, got {proj.kernel.shape}"
                )

    @property
    def width(self) -> int:
        return self.proj_q.inputs

    @property
    def head_dim(self) -> int:
        return self.width // self.heads


@dataclass(frozen=True)
class AttentionGrads:
    proj_q: YatDenseGrads
    proj_k: YatDenseGrads
    proj_v: YatDenseGrads
    proj_out: YatDenseGrads
    attn_alpha: float
    x: np.ndarray


@dataclass(frozen=True)
class MaskingConfig:
    """Random token masking with a learnable replacement token."""
    p: float
    mask_token: Vector

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"masking ratio must lie in [0, 1], got {self.p}")
        if self.mask_token.ndim != 1:
            raise ShapeError(
                f"mask_token must be 1-D, got shape {self.mask_token.shape}"
            )
