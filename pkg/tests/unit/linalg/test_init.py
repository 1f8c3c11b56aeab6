#!/usr/bin/env python
"""
Unit tests for the orthogonal initializer.
"""

import numpy as np
import pytest

from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.init import orthogonal_init
from neural_matter_kit.linalg.rng import RngState


def test_square_is_orthogonal():
    w, _ = orthogonal_init(4, 4, RngState(0))
    np.testing.assert_allclose(w @ w.T, np.eye(4), atol=1e-9)


def test_wide_has_orthonormal_rows():
    w, _ = orthogonal_init(2, 5, RngState(1))
    assert w.shape == (2, 5)
    np.testing.assert_allclose(w @ w.T, np.eye(2), atol=1e-9)


def test_tall_has_orthonormal_columns():
    w, _ = orthogonal_init(6, 3, RngState(2))
    assert w.shape == (6, 3)
    np.testing.assert_allclose(w.T @ w, np.eye(3), atol=1e-9)


def test_same_seed_is_bitwise_identical():
    a, state_a = orthogonal_init(5, 7, RngState(123))
    b, state_b = orthogonal_init(5, 7, RngState(123))
    np.testing.assert_array_equal(a, b)
    assert state_a == state_b


def test_rejects_empty_shapes():
    with pytest.raises(DomainError):
        orthogonal_init(0, 3, RngState(0))
