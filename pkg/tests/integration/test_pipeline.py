"""Integration tests for the train, checkpoint and NMS pipeline."""

import numpy as np
import pytest

from neural_matter_kit.config.loader import load_run_config
from neural_matter_kit.config.schema import Arch
from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nms.export import export_nms
from neural_matter_kit.nms.report import build_nms, load_nms_json
from neural_matter_kit.nn.checkpoint import load_checkpoint
from neural_matter_kit.nn.model import build_model
from neural_matter_kit.train.loop import evaluate, train


@pytest.fixture
def striped_images():
    """8x8 images whose class is the position of a bright horizontal stripe."""
    rng = np.random.default_rng(1)
    features, labels = [], []
    for index in range(48):
        label = index % 3
        image = rng.uniform(0.0, 0.2, size=(8, 8))
        image[2 * label + 1] += 0.8
        features.append(image.ravel())
        labels.append(label)
    data = Dataset.from_arrays(np.array(features), labels, image_shape=(8, 8))
    return data.take(range(36)), data.take(range(36, 48))


@pytest.mark.parametrize(
    "arch, model",
    [
        (Arch.E_MLP, {"hidden": [6]}),
        (
            Arch.E_VIT,
            {"width": 4, "depth": 1, "heads": 2, "mlp_width": 8, "mask_ratio": 0.25},
        ),
    ],
)
def test_train_checkpoint_nms(tmp_path, striped_images, arch, model):
    """A trained model survives a checkpoint and yields an NMS report of its head."""
    overrides = {
        "epochs": 2,
        "batch_size": 12,
        "save_checkpoint": True,
        "model": {"input_shape": [8, 8], "num_classes": 3, **model},
    }
    config, spec = load_run_config(None, arch, overrides)
    network = build_model(spec)
    report, _ = train(
        network, striped_images, config, RngState(9), checkpoint_dir=tmp_path / "ckpt"
    )
    assert len(report.epochs) == 3

    restored, params = load_checkpoint(tmp_path / "ckpt")
    assert restored.spec == spec
    for name, value in report.final_params.items():
        np.testing.assert_array_equal(params[name], value)
    test_data = striped_images[1]
    trained = evaluate(network, report.final_params, test_data)
    assert evaluate(restored, params, test_data) == trained

    kernel = restored.output_kernel()
    nms = build_nms(params[kernel], spec.epsilon, layer_name=kernel)
    written = export_nms(nms, tmp_path / "nms")
    assert len(written) == 5
    assert load_nms_json(tmp_path / "nms" / "nms.json").approx_equal(nms)


def test_same_seed_reproduces_the_run(striped_images):
    """Two runs from the same seed give bitwise identical curves and parameters."""
    overrides = {
        "epochs": 2,
        "batch_size": 8,
        "lambda_reg": 1e-3,
        "model": {"input_shape": [8, 8], "hidden": [6], "num_classes": 3},
    }
    config, spec = load_run_config(None, Arch.E_MLP, overrides)
    first, _ = train(build_model(spec), striped_images, config, RngState(2))
    second, _ = train(build_model(spec), striped_images, config, RngState(2))
    assert [e.loss for e in first.epochs] == [e.loss for e in second.epochs]
    accuracies = [e.test_accuracy for e in first.epochs]
    assert accuracies == [e.test_accuracy for e in second.epochs]
    for name, value in first.final_params.items():
        np.testing.assert_array_equal(value, second.final_params[name])
