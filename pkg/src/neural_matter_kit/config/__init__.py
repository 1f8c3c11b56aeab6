#!/usr/bin/env python
"""
Run configuration: schemas, file loading and logical validation.
"""

__all__ = [
    "Activation",
    "AdamConfig",
    "Arch",
    "Head",
    "ModelSpec",
    "SGDConfig",
    "TrainConfig",
    "load_config_file",
    "load_run_config",
    "merge_configs",
    "save_config_file",
    "validate_run_config",
]

from .schema import (
    Activation,
    AdamConfig,
    Arch,
    Head,
    ModelSpec,
    SGDConfig,
    TrainConfig,
)
from .loader import load_config_file, load_run_config, merge_configs, save_config_file
from .validator import validate_run_config
