#!/usr/bin/env python
"""
Unit tests for two-component PCA.
"""

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from neural_matter_kit.errors import InsufficientDataError
from neural_matter_kit.linalg.pca import pca_2d, principal_axes


def _power_iteration_axes(x, components=2, tol=1e-12, max_iter=100_000):
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    axes = []
    for seed in range(components):
        v = np.random.default_rng(seed).standard_normal(cov.shape[0])
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = cov @ v
            w /= np.linalg.norm(w)
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        eigenvalue = v @ cov @ v
        axes.append(v)
        cov = cov - eigenvalue * np.outer(v, v)
    return np.column_stack(axes)


class TestPca2d:
    """Tests for pca_2d."""

    def test_collinear_points(self):
        direction = np.array([1.0, -2.0, 0.5, 3.0, 1.0])
        x = np.outer([0.0, 1.0, 2.5], direction)
        _, explained = pca_2d(x)
        assert explained[0] == pytest.approx(1.0, abs=1e-9)

    def test_two_dimensional_input_is_isometry(self):
        x = np.random.default_rng(4).standard_normal((12, 2))
        points, explained = pca_2d(x)
        np.testing.assert_allclose(pdist(points), pdist(x), atol=1e-9)
        assert sum(explained) == pytest.approx(1.0)

    def test_matches_power_iteration(self):
        x = np.random.default_rng(10).standard_normal((10, 5))
        axes, _, _ = principal_axes(x, 2)
        oracle = _power_iteration_axes(x)
        for j in range(2):
            sign = np.sign(axes[:, j] @ oracle[:, j])
            np.testing.assert_allclose(axes[:, j], sign * oracle[:, j], atol=1e-8)

    def test_explained_fractions_ordered(self):
        x = np.random.default_rng(7).standard_normal((30, 6))
        _, (first, second) = pca_2d(x)
        assert 0.0 <= second <= first <= 1.0

    def test_row_order_invariance(self):
        x = np.random.default_rng(8).standard_normal((15, 4))
        order = np.random.default_rng(9).permutation(15)
        points, _ = pca_2d(x)
        shuffled, _ = pca_2d(x[order])
        np.testing.assert_allclose(np.abs(shuffled), np.abs(points[order]), atol=1e-9)

    def test_largest_loading_is_positive(self):
        x = np.random.default_rng(1).standard_normal((20, 4))
        axes, _, _ = principal_axes(x, 2)
        for j in range(2):
            assert axes[np.argmax(np.abs(axes[:, j])), j] > 0

    def test_requires_two_rows(self):
        with pytest.raises(InsufficientDataError):
            pca_2d([[1.0, 2.0, 3.0]])
