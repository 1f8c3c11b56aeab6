#!/usr/bin/env python
"""
Unit tests for the E-neuron dense layer.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neural_matter_kit.errors import DomainError, ShapeError
from neural_matter_kit.nn.params import YatDenseParams
from neural_matter_kit.nn.yat_dense import yat_dense_backward, yat_dense_forward
from neural_matter_kit.yat.products import ScaleMode


class TestYatDenseForward:
    """Tests for yat_dense_forward."""

    def test_orthogonal_neuron_is_zero(self):
        params = YatDenseParams(np.array([[1.0, 0.0]]), alpha=2.5)
        assert yat_dense_forward([[0.0, 1.0]], params)[0, 0] == 0.0

    def test_coincident_with_unit_scale(self):
        params = YatDenseParams(
            np.array([[1.0, 1.0]]), alpha=0.0, bias=np.zeros(1), epsilon=1e-6
        )
        value = yat_dense_forward([[1.0, 1.0]], params)[0, 0]
        assert value == pytest.approx(4.0e6, rel=1e-12)

    def test_output_shape(self):
        params = YatDenseParams(np.ones((7, 3)))
        assert yat_dense_forward(np.ones((5, 3)), params).shape == (5, 7)

    def test_rejects_column_mismatch(self):
        params = YatDenseParams(np.ones((2, 3)))
        with pytest.raises(ShapeError):
            yat_dense_forward(np.ones((4, 2)), params)

    def test_rejects_non_positive_epsilon(self):
        with pytest.raises(DomainError):
            YatDenseParams(np.ones((2, 2)), epsilon=0.0)

    def test_sqrt_outputs_scale_uses_neuron_count(self):
        kernel = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        x = np.array([[1.0, 2.0]])
        main = yat_dense_forward(x, YatDenseParams(kernel, alpha=1.0))
        sqrt_params = YatDenseParams(
            kernel, alpha=1.0, scale_mode=ScaleMode.SQRT_OUTPUTS
        )
        outputs_scaled = yat_dense_forward(x, sqrt_params)
        ratio = (np.sqrt(3) / np.log(4)) / (2 / np.log(3))
        np.testing.assert_allclose(outputs_scaled, main * ratio, rtol=1e-12)

    @settings(max_examples=50)
    @given(
        arrays(np.float64, (3, 4), elements=st.floats(-5, 5)),
        arrays(np.float64, (2, 4), elements=st.floats(-5, 5)),
    )
    def test_non_negative_without_bias(self, x, kernel):
        assert np.all(yat_dense_forward(x, YatDenseParams(kernel)) >= 0.0)


class TestYatDenseBackward:
    """Tests for yat_dense_backward."""

    def test_zero_upstream(self):
        rng = np.random.default_rng(0)
        params = YatDenseParams(rng.standard_normal((3, 4)), bias=np.zeros(3))
        x = rng.standard_normal((2, 4))
        grads = yat_dense_backward(x, params, np.zeros((2, 3)))
        assert not np.any(grads.kernel)
        assert not np.any(grads.x)
        assert grads.alpha == 0.0
        assert not np.any(grads.bias)

    def test_bias_gradient_counts_rows(self):
        params = YatDenseParams(np.ones((3, 2)), bias=np.zeros(3))
        grads = yat_dense_backward(np.ones((5, 2)), params, np.ones((5, 3)))
        np.testing.assert_array_equal(grads.bias, [5.0, 5.0, 5.0])

    def test_no_bias_gradient_without_bias(self):
        params = YatDenseParams(np.ones((3, 2)))
        assert yat_dense_backward(np.ones((1, 2)), params, np.ones((1, 3))).bias is None

    def test_rejects_upstream_mismatch(self):
        params = YatDenseParams(np.ones((3, 2)))
        with pytest.raises(ShapeError):
            yat_dense_backward(np.ones((2, 2)), params, np.ones((2, 4)))

    def test_matches_finite_differences(self, numeric_gradient, relative_error):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n, m, k = (int(v) for v in rng.integers(1, [9, 9, 5]))
            x = rng.standard_normal((k, n))
            kernel = rng.standard_normal((m, n))
            bias = rng.standard_normal(m)
            alpha = float(rng.uniform(-1.0, 1.0))
            epsilon = float(rng.uniform(0.1, 1.0))
            upstream = rng.standard_normal((k, m))

            def loss(kernel=kernel, x=x, bias=bias, alpha=alpha):
                params = YatDenseParams(kernel, alpha=alpha, bias=bias, epsilon=epsilon)
                return float(np.sum(upstream * yat_dense_forward(x, params)))

            params = YatDenseParams(kernel, alpha=alpha, bias=bias, epsilon=epsilon)
            grads = yat_dense_backward(x, params, upstream)
            numeric_kernel = numeric_gradient(lambda w: loss(kernel=w), kernel)
            numeric_bias = numeric_gradient(lambda b: loss(bias=b), bias)
            assert relative_error(grads.kernel, numeric_kernel) < 1e-4
            numeric_x = numeric_gradient(lambda v: loss(x=v), x)
            assert relative_error(grads.x, numeric_x) < 1e-4
            assert relative_error(grads.bias, numeric_bias) < 1e-4
            numeric_alpha = numeric_gradient(
                lambda a: loss(alpha=float(a[0])), np.array([alpha])
            )
            assert relative_error(np.array([grads.alpha]), numeric_alpha) < 1e-4
