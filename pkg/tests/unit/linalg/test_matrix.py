#!/usr/bin/env python
"""
Unit tests for matrix helpers.
"""

import numpy as np
import pytest

from neural_matter_kit.errors import NonFiniteError, ShapeError
from neural_matter_kit.linalg.matrix import (
    as_matrix,
    as_vector,
    ensure_all_finite,
    mat_mul,
)


class TestMatMul:
    """Tests for mat_mul."""

    def test_identity_left(self):
        a = [[1.0, 2.0], [3.0, 4.0]]
        np.testing.assert_array_equal(mat_mul(np.eye(2), a), np.array(a))

    def test_hand_multiplication(self):
        result = mat_mul([[1, 2], [3, 4]], [[0], [1]])
        np.testing.assert_array_equal(result, np.array([[2.0], [4.0]]))

    def test_zero_operand(self):
        b = np.arange(6, dtype=float).reshape(3, 2)
        np.testing.assert_array_equal(mat_mul(np.zeros((2, 3)), b), np.zeros((2, 2)))

    def test_right_identity_is_exact(self):
        a = np.random.default_rng(3).standard_normal((4, 5))
        np.testing.assert_array_equal(mat_mul(a, np.eye(5)), a)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError) as excinfo:
            mat_mul(np.ones((2, 3)), np.ones((2, 3)))
        assert "2x3" in str(excinfo.value)


class TestValidation:
    """Tests for conversion and finiteness checks."""

    def test_as_matrix_rejects_vectors(self):
        with pytest.raises(ShapeError):
            as_matrix([1.0, 2.0])

    def test_as_vector_rejects_matrices(self):
        with pytest.raises(ShapeError):
            as_vector([[1.0, 2.0]])

    def test_as_matrix_converts_to_float64(self):
        matrix = as_matrix([[1, 2], [3, 4]])
        assert matrix.dtype == np.float64
        assert matrix.shape == (2, 2)

    def test_non_finite_names_tensor(self):
        with pytest.raises(NonFiniteError) as excinfo:
            ensure_all_finite({"ok": np.zeros(2), "weights": np.array([1.0, np.nan])})
        assert "weights" in str(excinfo.value)

    def test_non_finite_is_floating_point_error(self):
        with pytest.raises(FloatingPointError):
            as_matrix([[np.inf]])
