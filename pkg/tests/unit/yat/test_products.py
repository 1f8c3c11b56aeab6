#!/usr/bin/env python
"""
Unit tests for the E and Ē products, the scale factor and the pairwise matrix.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.yat.products import (
    ScaleMode,
    cosine_similarity,
    pairwise_yat_matrix,
    posi_yat_product,
    scale_theta,
    yat_product,
)

finite = st.floats(
    min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False
)
vectors = arrays(np.float64, 4, elements=finite)


class TestYatProduct:
    """Tests for yat_product."""

    def test_orthogonal_is_zero(self):
        assert yat_product([1.0, 0.0], [0.0, 1.0], 1e-6) == 0.0

    def test_diagonal_neighbours(self):
        value = yat_product([6.0, 6.0], [5.0, 5.0], 1e-6)
        assert value == pytest.approx(3600 / (2 + 1e-6), rel=1e-12)

    def test_coincident_vectors(self):
        value = yat_product([1.0, 1.0], [1.0, 1.0], 1e-6)
        assert value == pytest.approx(4.0e6, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            yat_product([1.0, 2.0], [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("epsilon", [0.0, -1e-6])
    def test_rejects_non_positive_epsilon(self, epsilon):
        with pytest.raises(DomainError):
            yat_product([1.0], [1.0], epsilon)

    @given(vectors, vectors)
    def test_symmetric_and_non_negative(self, a, b):
        assert yat_product(a, b) >= 0.0
        expected = pytest.approx(yat_product(b, a), rel=1e-12, abs=1e-300)
        assert yat_product(a, b) == expected

    def test_scaling_limit(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(3)
        b = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        for c in (0.5, 2.0, 3.0):
            scaled = yat_product(c * a, c * b, 1e-12)
            assert scaled == pytest.approx(c**2 * yat_product(a, b, 1e-12), rel=1e-6)

    @given(
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=0.0, max_value=math.pi / 2),
        st.floats(min_value=0.0, max_value=math.pi / 2),
    )
    def test_non_increasing_in_angle_up_to_right_angle(self, r1, r2, t1, t2):
        low, high = sorted((t1, t2))
        near = yat_product([r1, 0.0], [r2 * math.cos(low), r2 * math.sin(low)], 1e-12)
        far = yat_product([r1, 0.0], [r2 * math.cos(high), r2 * math.sin(high)], 1e-12)
        assert far <= near * (1 + 1e-9) + 1e-12

    def test_angle_sweep_at_unit_norm(self):
        thetas = np.linspace(1e-3, math.pi - 1e-3, 2001)
        values = np.array(
            [yat_product([1.0, 0.0], [math.cos(t), math.sin(t)], 1e-12) for t in thetas]
        )
        falling = thetas <= math.pi / 2
        assert np.all(np.diff(values[falling]) <= 0.0)
        # past the right angle cos² grows again, bounded by 1/4 at θ = π
        assert np.all(np.diff(values[~falling]) >= 0.0)
        assert values[-1] == pytest.approx(0.25, rel=1e-5)


class TestPosiYatProduct:
    """Tests for posi_yat_product."""

    def test_coincident_is_zero(self):
        assert posi_yat_product([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_orthogonal(self):
        value = posi_yat_product([1.0, 0.0], [0.0, 1.0], 1e-6)
        assert value == pytest.approx(2.0e6, rel=1e-12)

    def test_diagonal_neighbours(self):
        value = posi_yat_product([6.0, 6.0], [5.0, 5.0], 1e-6)
        assert value == pytest.approx(2 / (3600 + 1e-6), rel=1e-12)

    def test_reciprocity_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b = rng.standard_normal(5), rng.standard_normal(5)
            eps = 1e-6
            dot2 = float(a @ b) ** 2
            dist2 = float((a - b) @ (a - b))
            product = yat_product(a, b, eps) * posi_yat_product(a, b, eps)
            lower = dist2 * dot2 / ((dist2 + eps) * (dot2 + eps))
            assert lower * (1 - 1e-9) <= product <= 1.0 + 1e-12
            tight = yat_product(a, b, 1e-12) * posi_yat_product(a, b, 1e-12)
            assert tight == pytest.approx(1.0, rel=1e-6)


class TestScaleTheta:
    """Tests for scale_theta."""

    @pytest.mark.parametrize("mode", list(ScaleMode))
    def test_zero_alpha(self, mode):
        assert scale_theta(7, 0.0, mode) == 1.0

    def test_input_dim_n1(self):
        assert scale_theta(1, 1.0) == pytest.approx(1 / math.log(2), rel=1e-12)

    def test_input_dim_n100(self):
        assert scale_theta(100, 1.0) == pytest.approx(100 / math.log(101), rel=1e-12)

    def test_sqrt_outputs(self):
        value = scale_theta(16, 1.0, ScaleMode.SQRT_OUTPUTS)
        assert value == pytest.approx(4 / math.log(17), rel=1e-12)

    def test_rejects_zero_dimension(self):
        with pytest.raises(DomainError):
            scale_theta(0, 1.0)


class TestPairwiseYatMatrix:
    """Tests for pairwise_yat_matrix."""

    def test_orthogonal_rows(self):
        matrix = pairwise_yat_matrix([[1.0, 0.0], [0.0, 1.0]], 1e-6)
        assert matrix[0, 1] == 0.0
        assert matrix[1, 0] == 0.0

    def test_identical_rows(self):
        matrix = pairwise_yat_matrix([[1.0, 1.0], [1.0, 1.0]], 1e-6)
        assert matrix[0, 1] == pytest.approx(4.0e6, rel=1e-9)

    def test_diagonal(self):
        w = np.array([[1.0, 2.0], [0.5, -1.0]])
        matrix = pairwise_yat_matrix(w, 1e-3)
        expected = np.sum(w**2, axis=1) ** 2 / 1e-3
        np.testing.assert_allclose(np.diag(matrix), expected, rtol=1e-12)

    def test_symmetric_and_matches_scalar(self):
        w = np.random.default_rng(2).standard_normal((6, 4))
        matrix = pairwise_yat_matrix(w)
        np.testing.assert_allclose(matrix, matrix.T, atol=1e-12)
        assert matrix[1, 4] == pytest.approx(yat_product(w[1], w[4]), rel=1e-9)


def test_cosine_similarity():
    assert cosine_similarity([1.0, 0.0], [1.0, 1.0]) == pytest.approx(1 / math.sqrt(2))
    assert cosine_similarity([0.0, 0.0], [1.0, 1.0]) == 0.0
