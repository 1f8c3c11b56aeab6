#!/usr/bin/env python
"""
Layer-stack models built from a ModelSpec.

Parameters live in one flat dictionary keyed by dotted names
("hidden_0.kernel", "block_2.attn.q.alpha", ...) whose insertion order is
the declaration order used by checkpoints. Scale exponents are stored as
0-d arrays so every trainable value is an ndarray.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from neural_matter_kit.config.schema import Arch, Head, ModelSpec
from neural_matter_kit.errors import ConsistencyError, ShapeError
from neural_matter_kit.linalg.init import orthogonal_init
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix
from neural_matter_kit.nn.dense import dense_apply, dense_backward_cached
from neural_matter_kit.nn.dropout import dropout_with_mask
from neural_matter_kit.nn.encoder import (
    EncoderParams,
    add_positions,
    add_positions_backward,
    encoder_block_apply,
    encoder_block_backward,
)
from neural_matter_kit.nn.params import (
    Activation,
    AttentionParams,
    DenseParams,
    MaskingConfig,
    YatDenseGrads,
    YatDenseParams,
)
from neural_matter_kit.nn.patch import (
    extract_patches,
    fold_patches,
    global_avg_pool,
    global_avg_pool_backward,
)
from neural_matter_kit.nn.yat_dense import yat_dense_apply, yat_dense_backward_cached
from neural_matter_kit.yat.normalize import SoftermaxPolicy, softermax, softmax
from neural_matter_kit.yat.products import ScaleMode

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]
Shapes = Dict[str, Tuple[int, ...]]

POSITION_INIT_SCALE = 0.02


def _yat_shapes(prefix: str, neurons: int, inputs: int, bias: bool = False) -> Shapes:
    shapes: Shapes = {f"{prefix}.kernel": (neurons, inputs), f"{prefix}.alpha": ()}
    if bias:
        shapes[f"{prefix}.bias"] = (neurons,)
    return shapes


def _yat_init(
    prefix: str, neurons: int, inputs: int, bias: bool, state: RngState
) -> Tuple[Params, RngState]:
    kernel, state = orthogonal_init(neurons, inputs, state)
    params: Params = {f"{prefix}.kernel": kernel, f"{prefix}.alpha": np.array(1.0)}
    if bias:
        params[f"{prefix}.bias"] = np.zeros(neurons)
    return params, state


def _yat_params(
    params: Params, prefix: str, epsilon: float, scale_mode: ScaleMode
) -> YatDenseParams:
    return YatDenseParams(
        kernel=params[f"{prefix}.kernel"],
        alpha=float(params[f"{prefix}.alpha"]),
        bias=params.get(f"{prefix}.bias"),
        epsilon=epsilon,
        scale_mode=scale_mode,
    )


def _yat_grads(prefix: str, grads: YatDenseGrads) -> Params:
    out: Params = {
        f"{prefix}.kernel": grads.kernel,
        f"{prefix}.alpha": np.array(grads.alpha),
    }
    if grads.bias is not None:
        out[f"{prefix}.bias"] = grads.bias
    return out


def _flatten_leading(x: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...]]:
    return x.reshape(-1, x.shape[-1]), x.shape[:-1]


class Layer(ABC):
    """One stage of a model; owns the parameters under its name prefix."""

    name: str

    def param_shapes(self) -> Shapes:
        return {}

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        return {}, state

    @abstractmethod
    def forward(
        self, params: Params, x: np.ndarray, state: RngState, training: bool
    ) -> Tuple[np.ndarray, Any, RngState]:
        """Return (output, cache, state)."""

    @abstractmethod
    def backward(
        self, params: Params, cache: Any, upstream: np.ndarray
    ) -> Tuple[Params, np.ndarray]:
        """Return (parameter gradients, gradient w.r.t. the layer input)."""

    def yat_kernels(self) -> List[Tuple[str, float]]:
        """Kernel keys of the yat layers this stage owns, with their epsilon."""
        return []


@dataclass
class YatDenseLayer(Layer):
    name: str
    inputs: int
    neurons: int
    bias: bool = False
    epsilon: float = 1e-6
    scale_mode: ScaleMode = ScaleMode.INPUT_DIM

    def param_shapes(self) -> Shapes:
        return _yat_shapes(self.name, self.neurons, self.inputs, self.bias)

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        return _yat_init(self.name, self.neurons, self.inputs, self.bias, state)

    def _params(self, params: Params) -> YatDenseParams:
        return _yat_params(params, self.name, self.epsilon, self.scale_mode)

    def forward(self, params, x, state, training):
        flat, lead = _flatten_leading(x)
        out, cache = yat_dense_apply(flat, self._params(params))
        return out.reshape(lead + (self.neurons,)), (cache, lead), state

    def backward(self, params, cache, upstream):
        inner, lead = cache
        grads = yat_dense_backward_cached(
            inner, self._params(params), upstream.reshape(-1, self.neurons)
        )
        return _yat_grads(self.name, grads), grads.x.reshape(lead + (self.inputs,))

    def yat_kernels(self) -> List[Tuple[str, float]]:
        return [(f"{self.name}.kernel", self.epsilon)]


@dataclass
class DenseLayer(Layer):
    name: str
    inputs: int
    outputs: int
    activation: Activation = Activation.NONE
    bias: bool = True

    def param_shapes(self) -> Shapes:
        shapes: Shapes = {f"{self.name}.weight": (self.outputs, self.inputs)}
        if self.bias:
            shapes[f"{self.name}.bias"] = (self.outputs,)
        return shapes

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        weight, state = orthogonal_init(self.outputs, self.inputs, state)
        params: Params = {f"{self.name}.weight": weight}
        if self.bias:
            params[f"{self.name}.bias"] = np.zeros(self.outputs)
        return params, state

    def _params(self, params: Params) -> DenseParams:
        bias = params.get(f"{self.name}.bias")
        return DenseParams(
            weight=params[f"{self.name}.weight"],
            bias=bias if bias is not None else np.zeros(self.outputs),
            activation=self.activation,
        )

    def forward(self, params, x, state, training):
        flat, lead = _flatten_leading(x)
        out, cache = dense_apply(flat, self._params(params))
        return out.reshape(lead + (self.outputs,)), (cache, lead), state

    def backward(self, params, cache, upstream):
        inner, lead = cache
        grads = dense_backward_cached(
            inner, self._params(params), upstream.reshape(-1, self.outputs)
        )
        out: Params = {f"{self.name}.weight": grads.weight}
        if self.bias:
            out[f"{self.name}.bias"] = grads.bias
        return out, grads.x.reshape(lead + (self.inputs,))


@dataclass
class DropoutLayer(Layer):
    name: str
    rate: float

    def forward(self, params, x, state, training):
        out, mask, state = dropout_with_mask(x, self.rate, state, training)
        return out, mask, state

    def backward(self, params, cache, upstream):
        return {}, upstream * cache


@dataclass
class PatchEmbedLayer(Layer):
    """Flat image rows -> (k, tokens, width) through a bias-free yat projection."""
    name: str
    image_shape: Tuple[int, ...]
    patch: int
    width: int
    epsilon: float = 1e-6
    scale_mode: ScaleMode = ScaleMode.INPUT_DIM

    @property
    def patch_dim(self) -> int:
        channels = self.image_shape[2] if len(self.image_shape) == 3 else 1
        return self.patch * self.patch * channels

    @property
    def tokens(self) -> int:
        return (self.image_shape[0] // self.patch) * (self.image_shape[1] // self.patch)

    def param_shapes(self) -> Shapes:
        return _yat_shapes(self.name, self.width, self.patch_dim)

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        return _yat_init(self.name, self.width, self.patch_dim, False, state)

    def forward(self, params, x, state, training):
        images = x.reshape((x.shape[0],) + tuple(self.image_shape))
        patches = extract_patches(images, self.patch)
        k = patches.shape[0]
        out, cache = yat_dense_apply(
            patches.reshape(k * self.tokens, self.patch_dim),
            _yat_params(params, self.name, self.epsilon, self.scale_mode),
        )
        return out.reshape(k, self.tokens, self.width), cache, state

    def backward(self, params, cache, upstream):
        k = upstream.shape[0]
        grads = yat_dense_backward_cached(
            cache,
            _yat_params(params, self.name, self.epsilon, self.scale_mode),
            upstream.reshape(k * self.tokens, self.width),
        )
        d_patches = grads.x.reshape(k, self.tokens, self.patch_dim)
        d_images = fold_patches(d_patches, tuple(self.image_shape), self.patch)
        return _yat_grads(self.name, grads), d_images.reshape(k, -1)

    def yat_kernels(self) -> List[Tuple[str, float]]:
        return [(f"{self.name}.kernel", self.epsilon)]


@dataclass
class PositionalLayer(Layer):
    name: str
    tokens: int
    width: int

    def param_shapes(self) -> Shapes:
        return {f"{self.name}.table": (self.tokens, self.width)}

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        table, state = rng_normal_matrix(
            state, self.tokens, self.width, POSITION_INIT_SCALE
        )
        return {f"{self.name}.table": table}, state

    def forward(self, params, x, state, training):
        return add_positions(x, params[f"{self.name}.table"]), None, state

    def backward(self, params, cache, upstream):
        return {f"{self.name}.table": add_positions_backward(upstream)}, upstream


@dataclass
class EncoderLayer(Layer):
    name: str
    width: int
    heads: int
    mlp_width: int
    mask_ratio: float = 0.0
    epsilon: float = 1e-6
    scale_mode: ScaleMode = ScaleMode.INPUT_DIM
    softermax_policy: SoftermaxPolicy = SoftermaxPolicy.CLAMP_SHIFT

    _PROJECTIONS = ("q", "k", "v", "out")

    def param_shapes(self) -> Shapes:
        shapes: Shapes = {}
        for proj in self._PROJECTIONS:
            prefix = f"{self.name}.attn.{proj}"
            shapes.update(_yat_shapes(prefix, self.width, self.width))
        shapes[f"{self.name}.attn.alpha"] = ()
        shapes.update(_yat_shapes(f"{self.name}.ffn_in", self.mlp_width, self.width))
        shapes.update(_yat_shapes(f"{self.name}.ffn_out", self.width, self.mlp_width))
        shapes[f"{self.name}.mask_token"] = (self.width,)
        return shapes

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        params: Params = {}
        for proj in self._PROJECTIONS:
            prefix = f"{self.name}.attn.{proj}"
            part, state = _yat_init(prefix, self.width, self.width, False, state)
            params.update(part)
        params[f"{self.name}.attn.alpha"] = np.array(1.0)
        for prefix, neurons, inputs in (
            (f"{self.name}.ffn_in", self.mlp_width, self.width),
            (f"{self.name}.ffn_out", self.width, self.mlp_width),
        ):
            part, state = _yat_init(prefix, neurons, inputs, False, state)
            params.update(part)
        token, state = rng_normal_matrix(state, 1, self.width, POSITION_INIT_SCALE)
        params[f"{self.name}.mask_token"] = token[0]
        return params, state

    def block_params(self, params: Params) -> EncoderParams:
        def yat(prefix: str) -> YatDenseParams:
            name = f"{self.name}.{prefix}"
            return _yat_params(params, name, self.epsilon, self.scale_mode)

        attention = AttentionParams(
            proj_q=yat("attn.q"),
            proj_k=yat("attn.k"),
            proj_v=yat("attn.v"),
            proj_out=yat("attn.out"),
            heads=self.heads,
            attn_alpha=float(params[f"{self.name}.attn.alpha"]),
            softermax_policy=self.softermax_policy,
        )
        return EncoderParams(
            attention=attention,
            ffn_in=yat("ffn_in"),
            ffn_out=yat("ffn_out"),
            masking=MaskingConfig(
                p=self.mask_ratio, mask_token=params[f"{self.name}.mask_token"]
            ),
        )

    def forward(self, params, x, state, training):
        return encoder_block_apply(x, self.block_params(params), state, training)

    def backward(self, params, cache, upstream):
        grads = encoder_block_backward(cache, self.block_params(params), upstream)
        out: Params = {}
        out.update(_yat_grads(f"{self.name}.attn.q", grads.attention.proj_q))
        out.update(_yat_grads(f"{self.name}.attn.k", grads.attention.proj_k))
        out.update(_yat_grads(f"{self.name}.attn.v", grads.attention.proj_v))
        out.update(_yat_grads(f"{self.name}.attn.out", grads.attention.proj_out))
        out[f"{self.name}.attn.alpha"] = np.array(grads.attention.attn_alpha)
        out.update(_yat_grads(f"{self.name}.ffn_in", grads.ffn_in))
        out.update(_yat_grads(f"{self.name}.ffn_out", grads.ffn_out))
        out[f"{self.name}.mask_token"] = grads.mask_token
        return out, grads.x

    def yat_kernels(self) -> List[Tuple[str, float]]:
        names = [f"{self.name}.attn.{proj}" for proj in self._PROJECTIONS]
        names += [f"{self.name}.ffn_in", f"{self.name}.ffn_out"]
        return [(f"{name}.kernel", self.epsilon) for name in names]


@dataclass
class PoolLayer(Layer):
    name: str

    def forward(self, params, x, state, training):
        return global_avg_pool(x), x.shape[-2], state

    def backward(self, params, cache, upstream):
        return {}, global_avg_pool_backward(upstream, cache)


@dataclass
class Model:
    """A layer stack plus its output probability head."""
    spec: ModelSpec
    layers: List[Layer]
    head: Head = Head.SOFTERMAX
    head_policy: SoftermaxPolicy = SoftermaxPolicy.STRICT
    _shapes: Optional[Shapes] = field(default=None, repr=False)

    def param_shapes(self) -> Shapes:
        if self._shapes is None:
            shapes: Shapes = {}
            for layer in self.layers:
                shapes.update(layer.param_shapes())
            self._shapes = shapes
        return self._shapes

    def param_count(self) -> int:
        shapes = self.param_shapes().values()
        return int(sum(np.prod(shape, dtype=np.int64) for shape in shapes))

    def init(self, state: RngState) -> Tuple[Params, RngState]:
        """Draw initial parameters: orthogonal kernels, alpha 1.0, zero biases."""
        params: Params = {}
        for layer in self.layers:
            part, state = layer.init(state)
            params.update(part)
        logger.debug(
            f"Initialised {self.spec.arch.value} with {self.param_count()} parameters"
        )
        return params, state

    def check_params(self, params: Params) -> None:
        """
        Verify names and shapes against the architecture.

        Raises:
            ConsistencyError: On missing or unexpected names
            ShapeError: On a shape mismatch
        """
        expected = self.param_shapes()
        missing = [name for name in expected if name not in params]
        extra = [name for name in params if name not in expected]
        if missing or extra:
            raise ConsistencyError(
                f"parameter names differ: missing {missing}, unexpected {extra}"
            )
        for name, shape in expected.items():
            actual = tuple(np.shape(params[name]))
            if actual != shape:
                raise ShapeError(
                    f"parameter '{name}' has shape {actual}, expected {shape}"
                )

    def forward(
        self,
        params: Params,
        x: ArrayLike,
        state: Optional[RngState] = None,
        training: bool = False,
    ) -> Tuple[np.ndarray, List[Any], RngState]:
        """
        Compute output scores (pre-head logits) for a batch of flat samples.

        Args:
            params: Parameter dictionary
            x: Batch k×input_dim
            state: RNG state for dropout and token masking (training mode)
            training: Enables dropout and token masking

        Returns:
            Tuple of (logits k×classes, per-layer caches, advanced state)

        Raises:
            ShapeError: If x is not k×input_dim
        """
        values = np.asarray(x, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.spec.input_dim:
            raise ShapeError(
                f"model expects (k, {self.spec.input_dim}) inputs, got {values.shape}"
            )
        state = state if state is not None else RngState(0)
        caches: List[Any] = []
        for layer in self.layers:
            values, cache, state = layer.forward(params, values, state, training)
            caches.append(cache)
        return values, caches, state

    def backward(
        self, params: Params, caches: Sequence[Any], upstream: ArrayLike
    ) -> Tuple[Params, np.ndarray]:
        """
        Back-propagate a logit gradient through the stack.

        Returns:
            Tuple of (gradients keyed like params, gradient w.r.t. the input batch)
        """
        grad = np.asarray(upstream, dtype=np.float64)
        grads: Params = {}
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            part, grad = layer.backward(params, cache, grad)
            grads.update(part)
        ordered = {name: grads[name] for name in self.param_shapes() if name in grads}
        return ordered, grad

    def probabilities(self, logits: ArrayLike) -> np.ndarray:
        if self.head == Head.SOFTERMAX:
            return softermax(logits, self.head_policy)
        return softmax(logits)

    def predict(
        self, params: Params, x: ArrayLike, batch_size: int = 1000
    ) -> np.ndarray:
        """Inference-mode class probabilities, evaluated batch_size rows at a time."""
        values = np.asarray(x, dtype=np.float64)
        chunks = []
        for start in range(0, values.shape[0], batch_size):
            logits, _, _ = self.forward(params, values[start:start + batch_size])
            chunks.append(self.probabilities(logits))
        if not chunks:
            return np.zeros((0, self.spec.num_classes))
        return np.concatenate(chunks, axis=0)

    def yat_kernels(self) -> List[Tuple[str, float]]:
        """(kernel key, epsilon) for every yat layer in declaration order."""
        kernels: List[Tuple[str, float]] = []
        for layer in self.layers:
            kernels.extend(layer.yat_kernels())
        return kernels

    def output_kernel(self) -> Optional[str]:
        """Kernel key of the output layer."""
        last = self.layers[-1]
        if isinstance(last, YatDenseLayer):
            return f"{last.name}.kernel"
        if isinstance(last, DenseLayer):
            return f"{last.name}.weight"
        return None


def _patch_embed(spec: ModelSpec, patch: int, width: int) -> PatchEmbedLayer:
    return PatchEmbedLayer(
        "patch_embed",
        tuple(spec.input_shape),
        patch,
        width,
        spec.epsilon,
        spec.scale_mode,
    )


def _yat_output(spec: ModelSpec, inputs: int) -> YatDenseLayer:
    return YatDenseLayer(
        "output",
        inputs,
        spec.num_classes,
        spec.head_bias,
        spec.epsilon,
        spec.scale_mode,
    )


def _mlp_layers(spec: ModelSpec) -> List[Layer]:
    layers: List[Layer] = []
    yat = spec.arch == Arch.E_MLP
    widths = list(spec.hidden)
    if spec.patch_size is not None:
        first = widths.pop(0) if widths else spec.num_classes
        layers.append(_patch_embed(spec, spec.patch_size, first))
        layers.append(PoolLayer("pool"))
        inputs = first
    else:
        inputs = spec.input_dim
    activation = spec.hidden_activation if spec.arch == Arch.MLP else Activation.NONE
    for index, width in enumerate(widths):
        name = f"hidden_{index}"
        if yat:
            layers.append(
                YatDenseLayer(name, inputs, width, False, spec.epsilon, spec.scale_mode)
            )
        else:
            layers.append(DenseLayer(name, inputs, width, activation, True))
        if spec.dropout_rate > 0.0:
            layers.append(DropoutLayer(f"dropout_{index}", spec.dropout_rate))
        inputs = width
    if yat:
        layers.append(_yat_output(spec, inputs))
    else:
        layers.append(
            DenseLayer(
                "output", inputs, spec.num_classes, Activation.NONE, spec.head_bias
            )
        )
    return layers


def _vit_layers(spec: ModelSpec) -> List[Layer]:
    embed = _patch_embed(spec, spec.patch_size or 4, spec.width)
    layers: List[Layer] = [
        embed,
        PositionalLayer("positions", embed.tokens, spec.width),
    ]
    for index in range(spec.depth):
        layers.append(
            EncoderLayer(
                f"block_{index}",
                spec.width,
                spec.heads,
                spec.mlp_width,
                spec.mask_ratio,
                spec.epsilon,
                spec.scale_mode,
                spec.softermax_policy,
            )
        )
    layers.append(PoolLayer("pool"))
    layers.append(_yat_output(spec, spec.width))
    return layers


def build_model(spec: ModelSpec) -> Model:
    """
    Build the layer stack described by spec.

    e-mlp stacks bias-free yat layers; mlp and linear stack dense layers
    (ReLU/GeLU or no activation); e-vit is patch embedding, positional table,
    encoder blocks, pooling and a yat output layer.
    """
    if spec.arch == Arch.E_VIT:
        layers = _vit_layers(spec)
    else:
        layers = _mlp_layers(spec)
    model = Model(spec=spec, layers=layers, head=spec.head)
    logger.info(
        f"Built {spec.arch.value} model with {len(layers)} layers "
        f"and {model.param_count()} parameters"
    )
    return model
