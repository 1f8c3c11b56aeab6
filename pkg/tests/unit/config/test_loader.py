#!/usr/bin/env python
"""
Unit tests for run configuration loading.

These tests validate file loading, merging and the per-architecture defaults.
"""

import json
import os
import tempfile

import pytest
import yaml

from neural_matter_kit.config.loader import (
    load_config_file,
    load_run_config,
    merge_configs,
    save_config_file,
)
from neural_matter_kit.config.schema import (
    AdamConfig,
    Arch,
    Head,
    SGDConfig,
    TrainConfig,
)


def test_load_config_file():
    """Test loading YAML and JSON files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yaml_path = os.path.join(tmpdir, "run.yaml")
        with open(yaml_path, "w") as f:
            yaml.dump({"epochs": 3, "optimizer": {"kind": "sgd", "lr": 0.1}}, f)
        expected = {"epochs": 3, "optimizer": {"kind": "sgd", "lr": 0.1}}
        assert load_config_file(yaml_path) == expected

        # JSON goes through the same parser
        json_path = os.path.join(tmpdir, "run.json")
        with open(json_path, "w") as f:
            json.dump({"batch_size": 32}, f)
        assert load_config_file(json_path) == {"batch_size": 32}

        # Empty file
        empty_path = os.path.join(tmpdir, "empty.yaml")
        open(empty_path, "w").close()
        assert load_config_file(empty_path) == {}


def test_load_config_file_errors(tmp_path):
    """Test missing, malformed and non-mapping files."""
    with pytest.raises(FileNotFoundError):
        load_config_file(tmp_path / "missing.yaml")

    broken = tmp_path / "broken.yaml"
    broken.write_text("epochs: [1, 2\n")
    with pytest.raises(ValueError):
        load_config_file(broken)

    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        load_config_file(listing)


def test_merge_configs():
    """Test that later dictionaries win and nested mappings merge."""
    base = {"optimizer": {"kind": "adam", "lr": 1e-3}, "epochs": 10}
    overlay = {"optimizer": {"lr": 1e-2}, "seed": 5}
    merged = merge_configs(base, overlay)
    assert merged == {
        "optimizer": {"kind": "adam", "lr": 1e-2},
        "epochs": 10,
        "seed": 5,
    }
    # Inputs are untouched
    assert base["optimizer"]["lr"] == 1e-3


def test_load_run_config_defaults():
    """Test the per-architecture defaults without a file."""
    train, model = load_run_config(None, Arch.E_MLP)
    assert isinstance(train.optimizer, AdamConfig)
    assert train.head == Head.SOFTERMAX
    assert model.arch == Arch.E_MLP
    assert model.hidden == [128, 64]

    train, model = load_run_config(None, "mlp")
    assert train.head == Head.SOFTMAX
    assert train.bias_in_head is True
    assert model.head_bias is True

    train, model = load_run_config(None, Arch.E_VIT)
    assert train.batch_size == 64
    assert model.patch_size == 4
    assert model.depth == 6


def test_load_run_config_file_and_overrides(tmp_path):
    """Test that the file overrides the defaults and overrides win over the file."""
    path = tmp_path / "run.yaml"
    path.write_text(
        "optimizer: {kind: sgd, lr: 0.05, momentum: 0.9}\n"
        "epochs: 4\n"
        "dropout_rate: 0.1\n"
        "model:\n"
        "  hidden: [32]\n"
    )
    train, model = load_run_config(path, Arch.E_MLP, {"epochs": 1})
    assert isinstance(train.optimizer, SGDConfig)
    assert train.optimizer.momentum == 0.9
    assert train.epochs == 1
    assert model.hidden == [32]
    # The model follows the training configuration's dropout
    assert model.dropout_rate == 0.1


def test_load_run_config_invalid(tmp_path):
    """Test that schema violations surface as ValueError."""
    path = tmp_path / "bad.yaml"
    path.write_text("epochs: -1\n")
    with pytest.raises(ValueError):
        load_run_config(path)

    path.write_text("model: 3\n")
    with pytest.raises(ValueError):
        load_run_config(path)


def test_save_config_file_round_trip(tmp_path):
    """Test that a saved configuration loads back unchanged."""
    train, model = load_run_config(None, Arch.E_MLP, {"lambda_reg": 1e-3})
    for name in ("run.yaml", "run.json"):
        path = save_config_file(tmp_path / name, train, model)
        loaded_train, loaded_model = load_run_config(path, Arch.E_MLP)
        assert loaded_train == train
        assert loaded_model == model


def test_train_config_defaults():
    """Test the TrainConfig defaults."""
    config = TrainConfig()
    assert config.epochs == 10
    assert config.batch_size == 128
    assert config.lambda_reg == 0.0
    assert config.save_checkpoint is False
