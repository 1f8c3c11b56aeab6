#!/usr/bin/env python
"""
Fixtures for the command-line tests.
"""

import logging

import numpy as np
import pytest

from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.data.idx import save_idx
from neural_matter_kit.cli.commands import SEED_ENV


@pytest.fixture(autouse=True)
def isolated_cli(monkeypatch):
    """Unset the seed variable and drop the handlers main() installs."""
    monkeypatch.delenv(SEED_ENV, raising=False)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_nmk_handler", False):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def idx_files(tmp_path):
    """A 30-sample, 3-class set of 4x4 images written as an IDX pair."""
    rng = np.random.default_rng(0)
    labels = np.arange(30) % 3
    noise = rng.uniform(0.0, 0.3, size=(30, 16))
    features = np.clip(noise + 0.2 * labels[:, None], 0.0, 1.0)
    images = tmp_path / "images.idx"
    label_file = tmp_path / "labels.idx"
    data = Dataset.from_arrays(features, labels, image_shape=(4, 4))
    save_idx(data, images, label_file)
    return images, label_file
