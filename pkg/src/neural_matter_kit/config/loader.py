#!/usr/bin/env python
"""
Configuration loading for training runs.

A run configuration file is YAML or JSON (JSON is valid YAML, so both go
through yaml.safe_load). Top-level keys are TrainConfig fields; an
optional ``model`` mapping overrides the architecture defaults:

    optimizer: {kind: adam, lr: 0.001}
    epochs: 10
    lambda_reg: 0.001
    model:
      hidden: [128, 64]
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml
from pydantic import ValidationError

from .schema import Arch, ModelSpec, TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_MODELS: Dict[Arch, Dict[str, Any]] = {
    Arch.E_MLP: {"arch": "e-mlp", "hidden": [128, 64]},
    Arch.MLP: {"arch": "mlp", "hidden": [128, 64], "hidden_activation": "relu"},
    Arch.LINEAR: {"arch": "linear", "hidden": [128, 64]},
    Arch.E_VIT: {
        "arch": "e-vit",
        "patch_size": 4,
        "width": 128,
        "depth": 6,
        "heads": 2,
        "mlp_width": 512,
        "mask_ratio": 0.1,
    },
}

DEFAULT_TRAIN: Dict[Arch, Dict[str, Any]] = {
    Arch.E_MLP: {"head": "softermax", "bias_in_head": False},
    Arch.MLP: {"head": "softmax", "bias_in_head": True},
    Arch.LINEAR: {"head": "softmax", "bias_in_head": True},
    Arch.E_VIT: {"head": "softermax", "bias_in_head": False, "batch_size": 64},
}


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a YAML or JSON file as a dictionary.

    Args:
        path: Path to the configuration file

    Returns:
        Dictionary with the file content (empty for an empty file)

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the content is not a mapping or cannot be parsed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found: {path}")
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        logger.error(f"Error parsing configuration file {path}: {e}")
        raise ValueError(f"Invalid configuration file: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"Invalid configuration file: {path} does not hold a mapping")
    return data


def save_config_file(
    path: Union[str, Path], train: TrainConfig, model: Optional[ModelSpec] = None
) -> Path:
    """
    Write a run configuration; JSON when the suffix is .json, YAML otherwise.

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = train.model_dump(mode="json")
    if model is not None:
        data["model"] = model.model_dump(mode="json")
    with open(path, "w") as f:
        if path.suffix == ".json":
            json.dump(data, f, indent=2)
        else:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
    logger.info(f"Saved configuration to {path}")
    return path


def _merge_dicts(base: Dict[str, Any], overlay: Dict[str, Any]) -> None:
    """
    Merge overlay dict into base dict, modifying base in-place.

    Args:
        base: Base dictionary
        overlay: Overlay dictionary with higher priority
    """
    for key, value in overlay.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _merge_dicts(base[key], value)
        else:
            base[key] = value


def merge_configs(*configs: Dict[str, Any]) -> Dict[str, Any]:
    """Merge dictionaries left to right; later ones win."""
    result: Dict[str, Any] = {}
    for config in configs:
        _merge_dicts(result, copy.deepcopy(config))
    return result


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    arch: Union[Arch, str] = Arch.E_MLP,
    overrides: Optional[Dict[str, Any]] = None,
) -> Tuple[TrainConfig, ModelSpec]:
    """
    Build the training configuration and model description for a run.

    The architecture defaults are merged with the file content and then
    with explicit overrides (for example a --seed flag). The model's head,
    head bias and dropout rate always follow the training configuration.

    Args:
        path: Optional configuration file
        arch: Architecture whose defaults seed the merge
        overrides: Optional dictionary merged last

    Returns:
        Tuple of (TrainConfig, ModelSpec)

    Raises:
        FileNotFoundError: If path does not exist
        ValueError: If the merged configuration is invalid
    """
    arch = Arch(arch)
    file_config = load_config_file(path) if path is not None else {}
    if path is not None:
        logger.info(f"Loaded configuration from {path}")
    merged = merge_configs(DEFAULT_TRAIN[arch], file_config, overrides or {})
    model_overrides = merged.pop("model", {}) or {}
    if not isinstance(model_overrides, dict):
        raise ValueError("Invalid configuration: 'model' must be a mapping")

    try:
        train = TrainConfig(**merged)
        model_dict = merge_configs(DEFAULT_MODELS[arch], model_overrides)
        model_dict["arch"] = arch.value
        model_dict["head"] = train.head.value
        model_dict["head_bias"] = train.bias_in_head
        model_dict["dropout_rate"] = train.dropout_rate
        model = ModelSpec(**model_dict)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        raise ValueError(f"Invalid configuration: {e}")
    logger.debug(
        f"Run configuration: {train.model_dump(mode='json')} "
        f"/ {model.model_dump(mode='json')}"
    )
    return train, model
