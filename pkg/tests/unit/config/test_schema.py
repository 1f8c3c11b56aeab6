#!/usr/bin/env python
"""
Unit tests for the configuration schema.
"""

import pytest
from pydantic import ValidationError

from neural_matter_kit.config.schema import (
    AdamConfig,
    Arch,
    Head,
    ModelSpec,
    SGDConfig,
    TrainConfig,
)


def test_optimizer_discriminator():
    """Test that the optimizer kind selects the model."""
    config = TrainConfig(optimizer={"kind": "sgd", "lr": 0.1})
    assert isinstance(config.optimizer, SGDConfig)
    config = TrainConfig(optimizer={"kind": "adam"})
    assert isinstance(config.optimizer, AdamConfig)
    with pytest.raises(ValidationError):
        TrainConfig(optimizer={"kind": "rmsprop"})


def test_optimizer_ranges():
    """Test learning rate and decay bounds."""
    with pytest.raises(ValidationError):
        SGDConfig(lr=0.0)
    with pytest.raises(ValidationError):
        SGDConfig(momentum=1.0)
    with pytest.raises(ValidationError):
        AdamConfig(beta2=1.0)


def test_softermax_forbids_head_bias():
    """Test that softermax heads cannot carry a bias."""
    with pytest.raises(ValidationError):
        TrainConfig(head=Head.SOFTERMAX, bias_in_head=True)
    with pytest.raises(ValidationError):
        ModelSpec(head=Head.SOFTERMAX, head_bias=True)
    assert TrainConfig(head=Head.SOFTMAX, bias_in_head=True).bias_in_head


def test_model_spec_input_shape():
    """Test input shape validation."""
    assert ModelSpec(input_shape=[5]).input_dim == 5
    assert ModelSpec(input_shape=[32, 32, 3]).input_dim == 3072
    with pytest.raises(ValidationError):
        ModelSpec(input_shape=[])
    with pytest.raises(ValidationError):
        ModelSpec(input_shape=[28, 0])


def test_model_spec_patches():
    """Test the patch and head divisibility rules."""
    with pytest.raises(ValidationError):
        ModelSpec(input_shape=[28, 28], patch_size=5)
    with pytest.raises(ValidationError):
        ModelSpec(arch=Arch.E_VIT, input_shape=[10])
    with pytest.raises(ValidationError):
        ModelSpec(arch=Arch.E_VIT, width=129, heads=2)
    assert ModelSpec(arch=Arch.E_VIT).patch_size is None
