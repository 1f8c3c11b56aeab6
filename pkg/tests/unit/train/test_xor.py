#!/usr/bin/env python
"""
Unit tests for the single-neuron XOR solver.
"""

import numpy as np
import pytest

from neural_matter_kit.data.synthetic import xor_dataset
from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.train.xor import (
    GRID_SIZE,
    decision_grid,
    fit_xor_neuron,
    solve_xor,
)


@pytest.fixture(scope="module")
def solution():
    solved, _ = solve_xor(10, RngState(7))
    return solved


def test_single_neuron_solves_xor(solution):
    assert solution.accuracy == 1.0
    data = xor_dataset()
    predicted = (solution.predict(data.features) > 0.5).astype(int)
    np.testing.assert_array_equal(predicted, data.labels)


def test_grid_covers_the_plane(solution):
    assert solution.grid.shape == (GRID_SIZE, GRID_SIZE)
    assert solution.grid_axis[0] == pytest.approx(-0.5)
    assert solution.grid_axis[-1] == pytest.approx(1.5)


def test_grid_orientation():
    axis, grid = decision_grid(np.array([1.0, -1.0]), 0.0)
    i, j = 100, 300
    point = np.array([axis[j], axis[i]])
    x = point @ np.array([1.0, -1.0])
    expected = x**2 / (np.sum((point - [1.0, -1.0]) ** 2) + 1e-6)
    assert grid[i, j] == pytest.approx(expected)


def test_same_seed_same_solution():
    a, _ = solve_xor(2, RngState(3))
    b, _ = solve_xor(2, RngState(3))
    np.testing.assert_array_equal(a.weights, b.weights)
    assert a.bias == b.bias


def test_restarts_must_be_positive():
    with pytest.raises(DomainError):
        solve_xor(0, RngState(0))


def test_most_seeds_solve_xor():
    solved = [solve_xor(10, RngState(seed))[0].accuracy == 1.0 for seed in range(10)]
    assert sum(solved) >= 8


def test_gradient_descent_loss_never_increases():
    fit = fit_xor_neuron(np.array([1.0, -1.0]), 0.0, learning_rate=1e-2, steps=300)
    assert fit.losses.shape == (301,)
    assert np.all(np.diff(fit.losses) <= 1e-12)
    assert fit.losses[-1] < fit.losses[0]
    assert fit.mse == fit.losses[-1]
