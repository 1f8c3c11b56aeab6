#!/usr/bin/env python
"""
Layers with analytic backward passes, model stacks and checkpoints.
"""

__all__ = [
    "Activation",
    "AttentionParams",
    "DenseParams",
    "EncoderParams",
    "MaskingConfig",
    "Model",
    "YatDenseParams",
    "build_model",
    "dense_backward",
    "dense_forward",
    "dropout",
    "e_mha",
    "e_mha_backward",
    "encoder_block",
    "extract_patches",
    "global_avg_pool",
    "global_avg_pool_backward",
    "load_checkpoint",
    "patch_embed",
    "patch_embed_backward",
    "save_checkpoint",
    "scaled_attention",
    "token_mask",
    "token_mask_backward",
    "yat_dense_backward",
    "yat_dense_forward",
]

from .params import (
    Activation,
    AttentionParams,
    DenseParams,
    MaskingConfig,
    YatDenseParams,
)
from .yat_dense import yat_dense_backward, yat_dense_forward
from .dense import dense_backward, dense_forward
from .dropout import dropout
from .patch import (
    extract_patches,
    global_avg_pool,
    global_avg_pool_backward,
    patch_embed,
    patch_embed_backward,
)
from .attention import e_mha, e_mha_backward, scaled_attention
from .masking import token_mask, token_mask_backward
from .encoder import EncoderParams, encoder_block
from .model import Model, build_model
from .checkpoint import load_checkpoint, save_checkpoint
