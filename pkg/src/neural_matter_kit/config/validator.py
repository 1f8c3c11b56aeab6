#!/usr/bin/env python
"""
Logical validation of run configurations.

Schema-level rules live in the Pydantic models; this module reports
combinations that are individually valid but conflict with each other.
"""

import logging
from typing import List, Tuple

from .schema import Arch, Head, ModelSpec, TrainConfig

logger = logging.getLogger(__name__)


def validate_run_config(train: TrainConfig, model: ModelSpec) -> Tuple[bool, List[str]]:
    """
    Check a training configuration against the model it drives.

    Args:
        train: Training configuration
        model: Model description

    Returns:
        Tuple of (is_valid, error_messages)
    """
    errors: List[str] = []
    errors.extend(_validate_head(train, model))
    errors.extend(_validate_architecture(train, model))
    for error in errors:
        logger.warning(f"Configuration conflict: {error}")
    return len(errors) == 0, errors


def _validate_head(train: TrainConfig, model: ModelSpec) -> List[str]:
    errors: List[str] = []
    if train.head != model.head:
        errors.append(
            f"train head '{train.head.value}' differs from "
            f"model head '{model.head.value}'"
        )
    if train.bias_in_head != model.head_bias:
        errors.append("bias_in_head differs between training configuration and model")
    if model.head == Head.SOFTERMAX and model.arch in (Arch.MLP, Arch.LINEAR):
        # dense output layers can emit negative scores
        errors.append(
            "softermax head needs non-negative scores, "
            f"but '{model.arch.value}' ends in a dense layer"
        )
    return errors


def _validate_architecture(train: TrainConfig, model: ModelSpec) -> List[str]:
    errors: List[str] = []
    if model.arch == Arch.E_VIT:
        if train.dropout_rate > 0.0:
            errors.append(
                "dropout is not used by e-vit; regularise with mask_ratio instead"
            )
        if model.width % model.heads:
            errors.append(
                f"width {model.width} is not divisible by {model.heads} heads"
            )
    elif not model.hidden and model.patch_size is not None:
        errors.append(
            "patch front end needs at least one hidden width for the embedding"
        )
    if train.lambda_reg > 0.0 and model.arch in (Arch.MLP, Arch.LINEAR):
        errors.append(f"lambda_reg has no yat layers to act on in '{model.arch.value}'")
    return errors
