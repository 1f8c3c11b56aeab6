#!/usr/bin/env python
"""
Configuration schema for training runs and model architectures.

These Pydantic models define the structure of run configuration files
(JSON or YAML, field names mirroring TrainConfig) and provide validation
rules.
"""

from enum import Enum
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from neural_matter_kit.yat.normalize import SoftermaxPolicy
from neural_matter_kit.yat.products import DEFAULT_EPSILON, ScaleMode


class Activation(str, Enum):
    """Activation of traditional dense layers."""
    RELU = "relu"
    GELU = "gelu"
    NONE = "none"


class Arch(str, Enum):
    """Supported architectures."""
    E_MLP = "e-mlp"
    MLP = "mlp"
    LINEAR = "linear"
    E_VIT = "e-vit"


class Head(str, Enum):
    """Output probability heads."""
    SOFTMAX = "softmax"
    SOFTERMAX = "softermax"


class SGDConfig(BaseModel):
    """Stochastic gradient descent with heavy-ball momentum."""
    kind: Literal["sgd"] = "sgd"
    lr: float = Field(0.01, gt=0.0, description="Learning rate")
    momentum: float = Field(0.0, ge=0.0, lt=1.0, description="Momentum coefficient")


class AdamConfig(BaseModel):
    """Adam with bias-corrected moments."""
    kind: Literal["adam"] = "adam"
    lr: float = Field(1e-3, gt=0.0, description="Learning rate")
    beta1: float = Field(0.9, ge=0.0, lt=1.0, description="First-moment decay")
    beta2: float = Field(0.999, ge=0.0, lt=1.0, description="Second-moment decay")
    eps: float = Field(1e-8, gt=0.0, description="Denominator stabiliser")


OptimizerConfig = Union[SGDConfig, AdamConfig]


class TrainConfig(BaseModel):
    """Optimizer settings and run controls for one training run."""
    optimizer: OptimizerConfig = Field(
        default_factory=AdamConfig, discriminator="kind", description="Optimizer"
    )
    epochs: int = Field(10, ge=0, description="Number of passes over the training set")
    batch_size: int = Field(128, ge=1, description="Mini-batch size")
    seed: int = Field(0, ge=0, lt=2**64, description="Run seed")
    dropout_rate: float = Field(
        0.0, ge=0.0, lt=1.0, description="Dropout between hidden layers"
    )
    lambda_reg: float = Field(0.0, ge=0.0, description="Weight of the E-regularizer")
    head: Head = Field(Head.SOFTERMAX, description="Output probability head")
    bias_in_head: bool = Field(False, description="Whether the output layer has a bias")
    max_train_samples: Optional[int] = Field(
        None, ge=1, description="Use only the first N training samples"
    )
    max_test_samples: Optional[int] = Field(
        None, ge=1, description="Use only the first N test samples"
    )
    eval_batch_size: int = Field(
        1000, ge=1, description="Batch size for inference-mode evaluation"
    )
    save_checkpoint: bool = Field(
        False, description="Write the final parameters as a checkpoint"
    )

    @model_validator(mode="after")
    def validate_head(self) -> "TrainConfig":
        """Softermax needs non-negative logits, which a bias can break."""
        if self.head == Head.SOFTERMAX and self.bias_in_head:
            raise ValueError("head 'softermax' requires bias_in_head to be false")
        return self


class ModelSpec(BaseModel):
    """Architecture description; enough to rebuild a model from a checkpoint."""
    arch: Arch = Field(Arch.E_MLP, description="Architecture family")
    input_shape: List[int] = Field(
        [28, 28], description="Image shape (H, W) or (H, W, C), or [n] for vectors"
    )
    hidden: List[int] = Field([128, 64], description="Hidden widths (MLP families)")
    num_classes: int = Field(10, ge=2, description="Number of output classes")
    patch_size: Optional[int] = Field(
        None, ge=1, description="Patch embedding + pooling front end (MLP families)"
    )
    width: int = Field(128, ge=1, description="Token width (e-vit)")
    depth: int = Field(6, ge=1, description="Encoder blocks (e-vit)")
    heads: int = Field(2, ge=1, description="Attention heads (e-vit)")
    mlp_width: int = Field(512, ge=1, description="Feed-forward width (e-vit)")
    mask_ratio: float = Field(
        0.1, ge=0.0, le=1.0, description="Token masking ratio between blocks (e-vit)"
    )
    epsilon: float = Field(
        DEFAULT_EPSILON, gt=0.0, description="Stabiliser of every yat layer"
    )
    scale_mode: ScaleMode = Field(
        ScaleMode.INPUT_DIM, description="Θ formula of yat layers"
    )
    softermax_policy: SoftermaxPolicy = Field(
        SoftermaxPolicy.CLAMP_SHIFT, description="Attention normalisation policy"
    )
    hidden_activation: Activation = Field(
        Activation.RELU, description="Activation of 'mlp' hidden layers"
    )
    dropout_rate: float = Field(
        0.0, ge=0.0, lt=1.0, description="Dropout between hidden layers"
    )
    head: Head = Field(Head.SOFTERMAX, description="Output probability head")
    head_bias: bool = Field(False, description="Whether the output layer has a bias")

    @field_validator("input_shape")
    def validate_input_shape(cls, v: List[int]) -> List[int]:
        """Input shape must be 1 to 3 positive sizes."""
        if not 1 <= len(v) <= 3 or any(size < 1 for size in v):
            raise ValueError(f"input_shape must hold 1-3 positive sizes, got {v}")
        return v

    @model_validator(mode="after")
    def validate_arch(self) -> "ModelSpec":
        """Check the architecture-specific constraints."""
        if self.head == Head.SOFTERMAX and self.head_bias:
            raise ValueError("head 'softermax' requires head_bias to be false")
        needs_image = self.arch == Arch.E_VIT or self.patch_size is not None
        if needs_image:
            if len(self.input_shape) < 2:
                raise ValueError(
                    f"{self.arch.value} with patches needs an image input_shape"
                )
            patch = self.patch_size or 4
            if self.input_shape[0] % patch or self.input_shape[1] % patch:
                raise ValueError(
                    f"input_shape {self.input_shape} is not divisible "
                    f"by patch size {patch}"
                )
        if self.arch == Arch.E_VIT and self.width % self.heads:
            raise ValueError(
                f"width {self.width} is not divisible by {self.heads} heads"
            )
        return self

    @property
    def input_dim(self) -> int:
        size = 1
        for dim in self.input_shape:
            size *= dim
        return size
