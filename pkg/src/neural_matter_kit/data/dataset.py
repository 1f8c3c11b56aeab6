#!/usr/bin/env python
"""
Dataset value type.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from neural_matter_kit.errors import ConsistencyError, DomainError, ShapeError
from neural_matter_kit.linalg.matrix import Matrix, ensure_finite


@dataclass(frozen=True)
class Dataset:
    """
    Samples as rows of features with integer class labels.

    image_shape records the (H, W) or (H, W, C) layout of image rows so they
    can be written back to IDX or cut into patches.
    """
    features: Matrix
    labels: NDArray[np.int64]
    num_classes: int
    image_shape: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ShapeError(f"features must be k×n, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            count = self.labels.shape[0] if self.labels.ndim else 0
            raise ConsistencyError(
                f"{count} labels for {self.features.shape[0]} samples"
            )
        ensure_finite(self.features, "features")
        if self.num_classes < 1:
            raise DomainError(f"num_classes must be positive, got {self.num_classes}")
        low = self.labels.min() if self.labels.size else 0
        high = self.labels.max() if self.labels.size else 0
        if self.labels.size and (low < 0 or high >= self.num_classes):
            raise DomainError(
                f"labels must lie in [0, {self.num_classes}), got [{low}, {high}]"
            )
        dim = self.features.shape[1]
        if self.image_shape is not None and int(np.prod(self.image_shape)) != dim:
            raise ShapeError(
                f"image shape {self.image_shape} does not hold {dim} features"
            )

    @classmethod
    def from_arrays(
        cls,
        features: ArrayLike,
        labels: ArrayLike,
        num_classes: Optional[int] = None,
        image_shape: Optional[Tuple[int, ...]] = None,
    ) -> "Dataset":
        """Build a dataset, inferring num_classes as max(label) + 1 when not given."""
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        if num_classes is None:
            num_classes = int(y.max()) + 1 if y.size else 1
        return cls(x, y, num_classes, image_shape)

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def take(self, indices: ArrayLike) -> "Dataset":
        """Rows selected by index, in the given order."""
        index = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[index], self.labels[index], self.num_classes, self.image_shape
        )

    def head(self, count: Optional[int]) -> "Dataset":
        """The first count samples; the whole dataset when count is None."""
        if count is None or count >= len(self):
            return self
        return self.take(np.arange(count))
