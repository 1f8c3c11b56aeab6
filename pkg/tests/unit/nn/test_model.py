#!/usr/bin/env python
"""
Unit tests for model stacks built from a ModelSpec.
"""

import numpy as np
import pytest

from neural_matter_kit.config.schema import Arch, Head, ModelSpec
from neural_matter_kit.errors import ConsistencyError, ShapeError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nn.model import (
    DenseLayer,
    DropoutLayer,
    EncoderLayer,
    PatchEmbedLayer,
    PoolLayer,
    YatDenseLayer,
    build_model,
)


def _small_vit(**extra):
    spec = ModelSpec(
        arch=Arch.E_VIT,
        input_shape=[4, 4],
        num_classes=3,
        patch_size=2,
        width=4,
        depth=1,
        heads=2,
        mlp_width=6,
        mask_ratio=0.0,
        epsilon=0.1,
        **extra,
    )
    return build_model(spec)


class TestBuildModel:
    """Tests for build_model."""

    def test_default_e_mlp_parameter_count(self):
        model = build_model(ModelSpec())
        assert model.param_count() == 784 * 128 + 128 * 64 + 64 * 10 + 3
        assert [type(layer) for layer in model.layers] == [YatDenseLayer] * 3
        assert model.head == Head.SOFTERMAX

    def test_mlp_and_linear_have_matching_budgets(self):
        mlp = build_model(ModelSpec(arch=Arch.MLP, head=Head.SOFTMAX, head_bias=True))
        linear = build_model(
            ModelSpec(arch=Arch.LINEAR, head=Head.SOFTMAX, head_bias=True)
        )
        e_mlp = build_model(ModelSpec())
        expected = 784 * 128 + 128 + 128 * 64 + 64 + 640 + 10
        assert mlp.param_count() == linear.param_count() == expected
        gap = abs(mlp.param_count() - e_mlp.param_count())
        assert gap / mlp.param_count() < 0.005
        assert all(isinstance(layer, DenseLayer) for layer in mlp.layers)

    def test_dropout_layers_inserted(self):
        spec = ModelSpec(
            input_shape=[6], hidden=[5, 4], num_classes=3, dropout_rate=0.2
        )
        kinds = [type(layer) for layer in build_model(spec).layers]
        assert kinds == [
            YatDenseLayer,
            DropoutLayer,
            YatDenseLayer,
            DropoutLayer,
            YatDenseLayer,
        ]

    def test_patch_front_end(self):
        spec = ModelSpec(input_shape=[4, 4], hidden=[5, 3], num_classes=2, patch_size=2)
        model = build_model(spec)
        assert isinstance(model.layers[0], PatchEmbedLayer)
        assert isinstance(model.layers[1], PoolLayer)
        assert model.layers[0].tokens == 4

    def test_e_vit_layout(self):
        model = _small_vit()
        assert sum(isinstance(layer, EncoderLayer) for layer in model.layers) == 1
        assert model.output_kernel() == "output.kernel"
        kernels = [name for name, _ in model.yat_kernels()]
        assert "block_0.attn.q.kernel" in kernels
        assert kernels[-1] == "output.kernel"


class TestModelForward:
    """Tests for forward, backward and predict."""

    def test_e_mlp_logits_non_negative(self):
        model = build_model(ModelSpec(input_shape=[6], hidden=[5], num_classes=3))
        params, _ = model.init(RngState(0))
        x = np.random.default_rng(0).standard_normal((4, 6))
        logits, _, _ = model.forward(params, x)
        assert logits.shape == (4, 3)
        assert np.all(logits >= 0.0)

    def test_predict_rows_are_distributions(self):
        model = build_model(ModelSpec(input_shape=[6], hidden=[5], num_classes=3))
        params, _ = model.init(RngState(1))
        x = np.random.default_rng(1).standard_normal((7, 6))
        probs = model.predict(params, x, batch_size=3)
        assert probs.shape == (7, 3)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_rejects_wrong_input_width(self):
        model = build_model(ModelSpec(input_shape=[6], hidden=[5], num_classes=3))
        params, _ = model.init(RngState(0))
        with pytest.raises(ShapeError):
            model.forward(params, np.ones((2, 5)))

    def test_init_is_deterministic(self):
        model = _small_vit()
        a, _ = model.init(RngState(4))
        b, _ = model.init(RngState(4))
        assert list(a) == list(model.param_shapes())
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_check_params(self):
        model = build_model(ModelSpec(input_shape=[6], hidden=[5], num_classes=3))
        params, _ = model.init(RngState(0))
        model.check_params(params)
        with pytest.raises(ConsistencyError):
            model.check_params({k: v for k, v in params.items() if k != "output.alpha"})
        broken = dict(params)
        broken["hidden_0.kernel"] = np.zeros((5, 7))
        with pytest.raises(ShapeError):
            model.check_params(broken)

    @pytest.mark.parametrize(
        "builder",
        [
            lambda: build_model(
                ModelSpec(input_shape=[5], hidden=[4, 3], num_classes=3, epsilon=0.1)
            ),
            lambda: build_model(
                ModelSpec(
                    arch=Arch.MLP,
                    input_shape=[5],
                    hidden=[4],
                    num_classes=3,
                    head=Head.SOFTMAX,
                    head_bias=True,
                    hidden_activation="gelu",
                )
            ),
            _small_vit,
        ],
    )
    def test_backward_matches_finite_differences(
        self, builder, numeric_gradient, relative_error
    ):
        model = builder()
        params, _ = model.init(RngState(7))
        rng = np.random.default_rng(8)
        x = rng.uniform(0.0, 1.0, (2, model.spec.input_dim))
        logits, caches, _ = model.forward(params, x)
        upstream = rng.standard_normal(logits.shape)
        grads, d_x = model.backward(params, caches, upstream)
        assert list(grads) == list(model.param_shapes())

        def loss_for(name):
            def loss(value):
                shifted = dict(params)
                shifted[name] = value
                out, _, _ = model.forward(shifted, x)
                return float(np.sum(upstream * out))
            return loss

        for name in list(params)[:3] + [list(params)[-1]]:
            numeric = numeric_gradient(loss_for(name), params[name])
            assert relative_error(grads[name], numeric) < 1e-4, name

        def loss_x(value):
            out, _, _ = model.forward(params, value)
            return float(np.sum(upstream * out))

        assert relative_error(d_x, numeric_gradient(loss_x, x)) < 1e-4
