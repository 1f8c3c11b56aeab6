#!/usr/bin/env python
"""
Unit tests for NMS report construction.
"""

import numpy as np
import pytest

from neural_matter_kit.errors import InsufficientDataError, ShapeError
from neural_matter_kit.linalg.init import orthogonal_init
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nms.report import (
    DEFAULT_GRID,
    build_nms,
    collapse_pairs,
    density_grid,
    max_offdiagonal_similarity,
    similarity_noise_floor,
)


@pytest.fixture
def kernel_with_duplicate():
    return np.vstack([np.eye(5) + 0.3, np.eye(5)[1] + 0.3])


class TestBuildNms:
    """Tests for build_nms."""

    def test_duplicate_rows_are_flagged(self, kernel_with_duplicate):
        report = build_nms(kernel_with_duplicate)
        assert [(pair.i, pair.j) for pair in report.collapse_pairs] == [(1, 5)]
        assert report.similarity.shape == (6, 6)
        assert report.projection == "pca"
        assert report.neurons == 6

    def test_orthogonal_rows_have_no_pairs(self):
        report = build_nms(np.eye(4))
        assert report.collapse_pairs == []
        assert report.median_similarity == 0.0
        assert max_offdiagonal_similarity(report) == 0.0

    def test_duplicate_among_random_rows_is_flagged(self):
        kernel = np.random.default_rng(9).normal(size=(16, 8))
        kernel[11] = kernel[4]
        report = build_nms(kernel)
        flagged = {(pair.i, pair.j): pair.similarity for pair in report.collapse_pairs}
        assert (4, 11) in flagged
        assert max(flagged, key=flagged.get) == (4, 11)

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("rows,cols", [(8, 8), (16, 16), (6, 12)])
    def test_orthogonal_init_has_no_pairs(self, seed, rows, cols):
        kernel, _ = orthogonal_init(rows, cols, RngState(seed))
        assert build_nms(kernel).collapse_pairs == []

    def test_scaling_keeps_flagged_set(self):
        rng = np.random.default_rng(4)
        kernel = rng.normal(size=(8, 6))
        kernel /= np.linalg.norm(kernel, axis=1, keepdims=True)
        kernel[5] = kernel[2] + 0.01 * rng.normal(size=6)
        base = build_nms(kernel, epsilon=1e-12)
        scaled = build_nms(10.0 * kernel, epsilon=1e-12)
        assert base.collapse_pairs
        flagged = [(p.i, p.j) for p in base.collapse_pairs]
        assert flagged == [(p.i, p.j) for p in scaled.collapse_pairs]

    def test_density_grid_layout(self, kernel_with_duplicate):
        report = build_nms(kernel_with_duplicate)
        assert report.density_grid.shape == (DEFAULT_GRID, DEFAULT_GRID)
        assert report.grid_x[0] < report.points[:, 0].min()
        assert report.grid_x[-1] > report.points[:, 0].max()
        assert np.all(report.density_grid >= 0.0)

    def test_external_points(self, kernel_with_duplicate):
        points = np.arange(12.0).reshape(6, 2) ** 1.5
        report = build_nms(kernel_with_duplicate, points=points)
        assert report.projection == "external"
        np.testing.assert_array_equal(report.points, points)

    def test_external_points_shape(self, kernel_with_duplicate):
        with pytest.raises(ShapeError):
            build_nms(kernel_with_duplicate, points=np.zeros((5, 2)))

    def test_single_neuron(self):
        with pytest.raises(InsufficientDataError):
            build_nms([[1.0, 2.0]])


def test_collapse_pairs_threshold():
    similarity = np.array([[0.0, 1.0, 50.0], [1.0, 0.0, 2.0], [50.0, 2.0, 0.0]])
    pairs, median = collapse_pairs(similarity, kappa=10.0)
    assert median == 2.0
    assert [(p.i, p.j, p.similarity) for p in pairs] == [(0, 2, 50.0)]


def test_degenerate_points_fall_back_to_zero_density():
    points = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
    grid_x, grid_y, density = density_grid(points, 8)
    assert density.shape == (8, 8)
    assert np.all(density == 0.0)
    assert grid_x[0] == pytest.approx(0.5)


def test_noise_floor_suppresses_roundoff_pairs():
    similarity = np.array(
        [[0.0, 1e-32, 1e-30], [1e-32, 0.0, 1e-33], [1e-30, 1e-33, 0.0]]
    )
    pairs, _ = collapse_pairs(similarity, kappa=10.0)
    assert [(p.i, p.j) for p in pairs] == [(0, 2)]
    floor = similarity_noise_floor(np.eye(3))
    pairs, _ = collapse_pairs(similarity, kappa=10.0, noise_floor=floor)
    assert pairs == []


def test_noise_floor_is_tiny_for_unit_rows():
    floor = similarity_noise_floor(np.eye(4), epsilon=1e-3)
    assert floor.shape == (4, 4)
    assert np.all(floor < 1e-24)
    assert np.all(floor > 0.0)
