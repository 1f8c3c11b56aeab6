#!/usr/bin/env python
"""
Unit tests for the training loop.
"""

import csv
from pathlib import Path

import numpy as np
import pytest

from neural_matter_kit.config.schema import AdamConfig, ModelSpec, TrainConfig
from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.data.synthetic import synthetic_blobs
from neural_matter_kit.errors import ConsistencyError, ShapeError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nn.checkpoint import load_checkpoint
from neural_matter_kit.nn.model import build_model
from neural_matter_kit.train.loop import METRICS_HEADER, evaluate, train


@pytest.fixture
def blobs():
    train_data, state = synthetic_blobs(2, 40, 3, 0.4, RngState(0))
    test_data, _ = synthetic_blobs(2, 10, 3, 0.4, state)
    return train_data, test_data


@pytest.fixture
def model():
    spec = ModelSpec(input_shape=[3], hidden=[6], num_classes=2, epsilon=1e-3)
    return build_model(spec)


@pytest.fixture
def config():
    return TrainConfig(
        epochs=3, batch_size=16, optimizer=AdamConfig(lr=1e-2), lambda_reg=1e-3
    )


class TestTrain:
    """Tests for train."""

    def test_epoch_zero_is_the_initial_evaluation(self, model, blobs, config):
        report, _ = train(model, blobs, config, RngState(1))
        assert [entry.epoch for entry in report.epochs] == [0, 1, 2, 3]
        assert report.epochs[0].seconds == 0.0
        assert report.param_count == model.param_count()
        assert report.final_params is not None

    def test_same_seed_same_curve(self, model, blobs, config):
        first, _ = train(model, blobs, config, RngState(4))
        second, _ = train(model, blobs, config, RngState(4))
        assert [e.loss for e in first.epochs] == [e.loss for e in second.epochs]
        for name, value in first.final_params.items():
            np.testing.assert_array_equal(value, second.final_params[name])

    def test_metrics_csv(self, tmp_path, model, blobs, config):
        path = tmp_path / "metrics.csv"
        train(model, blobs, config, RngState(1), metrics_path=path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == METRICS_HEADER
        assert [row[0] for row in rows[1:]] == ["0", "1", "2", "3"]

    def test_checkpoint_written_when_requested(self, tmp_path, model, blobs, config):
        config = config.model_copy(update={"save_checkpoint": True})
        ckpt = tmp_path / "ckpt"
        report, _ = train(model, blobs, config, RngState(1), checkpoint_dir=ckpt)
        assert report.checkpoint_path is not None
        restored, params = load_checkpoint(Path(report.checkpoint_path).parent)
        assert restored.param_count() == model.param_count()
        np.testing.assert_array_equal(
            evaluate(restored, params, blobs[1]),
            evaluate(model, report.final_params, blobs[1]),
        )

    def test_no_checkpoint_by_default(self, tmp_path, model, blobs, config):
        ckpt = tmp_path / "ckpt"
        report, _ = train(model, blobs, config, RngState(1), checkpoint_dir=ckpt)
        assert report.checkpoint_path is None
        assert not (tmp_path / "ckpt").exists()

    def test_sample_caps(self, model, blobs, config):
        caps = {"max_train_samples": 10, "epochs": 1, "batch_size": 4}
        config = config.model_copy(update=caps)
        report, _ = train(model, blobs, config, RngState(1))
        assert len(report.epochs) == 2

    def test_zero_epochs(self, model, blobs, config):
        config = config.model_copy(update={"epochs": 0})
        report, _ = train(model, blobs, config, RngState(1))
        assert len(report.epochs) == 1

    def test_report_json(self, tmp_path, model, blobs, config):
        report, _ = train(model, blobs, config, RngState(1))
        text = report.save_json(tmp_path / "report.json").read_text()
        assert '"final_params"' not in text
        assert '"epochs"' in text

    def test_feature_width_mismatch(self, model, config):
        data = Dataset.from_arrays(np.zeros((4, 5)), [0, 1, 0, 1])
        with pytest.raises(ShapeError):
            train(model, (data, data), config, RngState(0))

    def test_too_many_classes(self, model, config):
        data = Dataset.from_arrays(np.zeros((3, 3)), [0, 1, 2])
        with pytest.raises(ConsistencyError):
            train(model, (data, data), config, RngState(0))


def test_evaluate_empty_dataset(model):
    params, _ = model.init(RngState(0))
    empty = Dataset(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), 2)
    assert evaluate(model, params, empty) == (0.0, 0.0)
