#!/usr/bin/env python
"""
Finite-difference verification of the analytic backward passes.

Every case builds a scalar loss over a few named tensors together with its
analytic gradients. Each checked entry is perturbed by ±h (central
differences, h = 1e-5) and compared with

    rel_err = |a − fd| / max(1e-8, |a|, |fd|)
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from neural_matter_kit.config.schema import Activation, Arch, Head, ModelSpec
from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import (
    DrawKind,
    RngState,
    rng_draw,
    rng_normal_matrix,
    rng_permutation,
)
from neural_matter_kit.nn.attention import e_mha, e_mha_backward
from neural_matter_kit.nn.dense import dense_backward, dense_forward
from neural_matter_kit.nn.masking import token_mask, token_mask_backward
from neural_matter_kit.nn.model import EncoderLayer, build_model
from neural_matter_kit.nn.params import (
    AttentionParams,
    DenseParams,
    MaskingConfig,
    YatDenseParams,
)
from neural_matter_kit.nn.patch import (
    global_avg_pool,
    global_avg_pool_backward,
    patch_embed,
    patch_embed_backward,
)
from neural_matter_kit.nn.yat_dense import yat_dense_backward, yat_dense_forward
from neural_matter_kit.train.loop import train_step
from neural_matter_kit.train.losses import softermax_cross_entropy
from neural_matter_kit.train.regularizer import e_regularizer
from neural_matter_kit.yat.products import ScaleMode

logger = logging.getLogger(__name__)

STEP = 1e-5
DENOMINATOR_FLOOR = 1e-8

Tensors = Dict[str, np.ndarray]


@dataclass(frozen=True)
class GradCase:
    """A scalar loss over named tensors and its analytic gradient."""
    tensors: Tensors
    loss: Callable[[Tensors], float]
    gradients: Callable[[Tensors], Tensors]
    max_entries: Optional[int] = None


CaseBuilder = Callable[[RngState], Tuple[GradCase, RngState]]


class GradCheckReport(BaseModel):
    case: str
    trials: int
    tolerance: float
    max_rel_err: float = Field(0.0, ge=0.0)
    failures: int = Field(
        0, ge=0, description="Checked entries above the tolerance"
    )
    checked: int = Field(0, ge=0, description="Number of entries compared")
    worst_tensor: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def relative_error(analytic: float, numeric: float) -> float:
    scale = max(DENOMINATOR_FLOOR, abs(analytic), abs(numeric))
    return abs(analytic - numeric) / scale


def _normal(
    state: RngState, shape: Tuple[int, ...], scale: float = 1.0
) -> Tuple[np.ndarray, RngState]:
    size = int(np.prod(shape)) if shape else 1
    values, state = rng_normal_matrix(state, 1, size, scale)
    return values.reshape(shape), state


def _uniform(state: RngState, low: float, high: float) -> Tuple[float, RngState]:
    values, state = rng_draw(state, DrawKind.UNIFORM01, 1)
    return float(low + (high - low) * values[0]), state


def _integer(state: RngState, low: int, high: int) -> Tuple[int, RngState]:
    """Uniform integer in [low, high]."""
    value, state = _uniform(state, 0.0, 1.0)
    return low + min(int(value * (high - low + 1)), high - low), state


def _labels(
    state: RngState, rows: int, classes: int
) -> Tuple[np.ndarray, RngState]:
    values, state = rng_draw(state, DrawKind.UNIFORM01, rows)
    return np.minimum((values * classes).astype(np.int64), classes - 1), state


def _dense_linear(state: RngState) -> Tuple[GradCase, RngState]:
    x, state = _normal(state, (3, 4))
    weight, state = _normal(state, (5, 4))
    bias, state = _normal(state, (5,))
    upstream, state = _normal(state, (3, 5))

    def params(t: Tensors) -> DenseParams:
        return DenseParams(t["weight"], t["bias"], Activation.NONE)

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * dense_forward(t["x"], params(t))))

    def gradients(t: Tensors) -> Tensors:
        g = dense_backward(t["x"], params(t), upstream)
        return {"weight": g.weight, "bias": g.bias, "x": g.x}

    tensors = {"weight": weight, "bias": bias, "x": x}
    return GradCase(tensors, loss, gradients), state


def _yat_dense(state: RngState) -> Tuple[GradCase, RngState]:
    k, state = _integer(state, 1, 4)
    n, state = _integer(state, 2, 8)
    m, state = _integer(state, 2, 8)
    mode_draw, state = _uniform(state, 0.0, 1.0)
    mode = ScaleMode.INPUT_DIM if mode_draw < 0.5 else ScaleMode.SQRT_OUTPUTS
    x, state = _normal(state, (k, n))
    kernel, state = _normal(state, (m, n))
    bias, state = _normal(state, (m,))
    alpha, state = _uniform(state, 0.5, 1.5)
    upstream, state = _normal(state, (k, m))

    def params(t: Tensors) -> YatDenseParams:
        return YatDenseParams(
            t["kernel"], float(t["alpha"]), t["bias"], scale_mode=mode
        )

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * yat_dense_forward(t["x"], params(t))))

    def gradients(t: Tensors) -> Tensors:
        g = yat_dense_backward(t["x"], params(t), upstream)
        return {
            "kernel": g.kernel,
            "alpha": np.array(g.alpha),
            "bias": g.bias,
            "x": g.x,
        }

    tensors = {"kernel": kernel, "alpha": np.array(alpha), "bias": bias, "x": x}
    return GradCase(tensors, loss, gradients), state


def _softermax_head(state: RngState) -> Tuple[GradCase, RngState]:
    raw, state = _normal(state, (3, 4))
    labels, state = _labels(state, 3, 4)

    def loss(t: Tensors) -> float:
        return softermax_cross_entropy(t["logits"], labels)[0]

    def gradients(t: Tensors) -> Tensors:
        return {"logits": softermax_cross_entropy(t["logits"], labels)[1]}

    return GradCase({"logits": np.abs(raw) + 0.1}, loss, gradients), state


_PROJECTIONS = ("q", "k", "v", "out")


def _e_mha(state: RngState) -> Tuple[GradCase, RngState]:
    tokens, state = _integer(state, 2, 4)
    heads, state = _integer(state, 1, 2)
    width = 4
    tensors: Tensors = {}
    for proj in _PROJECTIONS:
        tensors[f"{proj}.kernel"], state = _normal(state, (width, width), 0.5)
        alpha, state = _uniform(state, 0.5, 1.5)
        tensors[f"{proj}.alpha"] = np.array(alpha)
    attn_alpha, state = _uniform(state, 0.5, 1.5)
    tensors["attn_alpha"] = np.array(attn_alpha)
    tensors["x"], state = _normal(state, (2, tokens, width))
    upstream, state = _normal(state, (2, tokens, width))

    def params(t: Tensors) -> AttentionParams:
        projections = {
            f"proj_{proj}": YatDenseParams(
                t[f"{proj}.kernel"], float(t[f"{proj}.alpha"])
            )
            for proj in _PROJECTIONS
        }
        return AttentionParams(
            heads=heads, attn_alpha=float(t["attn_alpha"]), **projections
        )

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * e_mha(t["x"], params(t))))

    def gradients(t: Tensors) -> Tensors:
        g = e_mha_backward(t["x"], params(t), upstream)
        out: Tensors = {}
        for proj in _PROJECTIONS:
            part = getattr(g, f"proj_{proj}")
            out[f"{proj}.kernel"] = part.kernel
            out[f"{proj}.alpha"] = np.array(part.alpha)
        out["attn_alpha"] = np.array(g.attn_alpha)
        out["x"] = g.x
        return out

    return GradCase(tensors, loss, gradients), state


def _patch_embed(state: RngState) -> Tuple[GradCase, RngState]:
    image, state = _normal(state, (4, 4))
    kernel, state = _normal(state, (3, 4))
    alpha, state = _uniform(state, 0.5, 1.5)
    upstream, state = _normal(state, (4, 3))

    def params(t: Tensors) -> YatDenseParams:
        return YatDenseParams(t["kernel"], float(t["alpha"]))

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * patch_embed(t["image"], 2, params(t))))

    def gradients(t: Tensors) -> Tensors:
        g, d_image = patch_embed_backward(t["image"], 2, params(t), upstream)
        return {"kernel": g.kernel, "alpha": np.array(g.alpha), "image": d_image}

    tensors = {"kernel": kernel, "alpha": np.array(alpha), "image": image}
    return GradCase(tensors, loss, gradients), state


def _global_avg_pool(state: RngState) -> Tuple[GradCase, RngState]:
    tokens, state = _normal(state, (2, 3, 4))
    upstream, state = _normal(state, (2, 4))

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * global_avg_pool(t["tokens"])))

    def gradients(t: Tensors) -> Tensors:
        return {"tokens": global_avg_pool_backward(upstream, t["tokens"].shape[-2])}

    return GradCase({"tokens": tokens}, loss, gradients), state


def _regularizer(state: RngState) -> Tuple[GradCase, RngState]:
    m, state = _integer(state, 2, 5)
    n, state = _integer(state, 2, 5)
    kernel, state = _normal(state, (m, n))

    def loss(t: Tensors) -> float:
        return e_regularizer(t["kernel"])[0]

    def gradients(t: Tensors) -> Tensors:
        return {"kernel": e_regularizer(t["kernel"])[1]}

    return GradCase({"kernel": kernel}, loss, gradients), state


def _token_mask(state: RngState) -> Tuple[GradCase, RngState]:
    x, state = _normal(state, (2, 5, 4))
    token, state = _normal(state, (4,))
    upstream, state = _normal(state, (2, 5, 4))
    mask_state = state
    state = state.advance()

    def forward(t: Tensors) -> Tuple[np.ndarray, np.ndarray]:
        config = MaskingConfig(0.5, t["mask_token"])
        masked, mask, _ = token_mask(t["x"], config, mask_state, training=True)
        return masked, mask

    def loss(t: Tensors) -> float:
        return float(np.sum(upstream * forward(t)[0]))

    def gradients(t: Tensors) -> Tensors:
        d_x, d_token = token_mask_backward(upstream, forward(t)[1])
        return {"x": d_x, "mask_token": d_token}

    return GradCase({"x": x, "mask_token": token}, loss, gradients), state


def _e_mlp_composite(state: RngState) -> Tuple[GradCase, RngState]:
    spec = ModelSpec(
        arch=Arch.E_MLP,
        input_shape=[5],
        hidden=[4, 3],
        num_classes=3,
        head=Head.SOFTERMAX,
    )
    model = build_model(spec)
    lambda_reg = 1e-3
    params: Tensors = {}
    for name, shape in model.param_shapes().items():
        if shape:
            params[name], state = _normal(state, shape)
        else:
            alpha, state = _uniform(state, 0.5, 1.5)
            params[name] = np.array(alpha)
    x, state = _normal(state, (4, 5))
    labels, state = _labels(state, 4, 3)

    def loss(t: Tensors) -> float:
        return train_step(model, t, x, labels, lambda_reg, RngState(0))[0]

    def gradients(t: Tensors) -> Tensors:
        return train_step(model, t, x, labels, lambda_reg, RngState(0))[1]

    return GradCase(params, loss, gradients), state


def _e_vit_block(state: RngState) -> Tuple[GradCase, RngState]:
    layer = EncoderLayer("block", width=128, heads=2, mlp_width=512, mask_ratio=0.25)
    params, state = layer.init(state)
    x, state = _normal(state, (1, 4, 128))
    upstream, state = _normal(state, (1, 4, 128))
    mask_state = state
    state = state.advance()
    tensors = dict(params)
    tensors["x"] = x

    def loss(t: Tensors) -> float:
        out, _, _ = layer.forward(t, t["x"], mask_state, True)
        return float(np.sum(upstream * out))

    def gradients(t: Tensors) -> Tensors:
        _, cache, _ = layer.forward(t, t["x"], mask_state, True)
        grads, d_x = layer.backward(t, cache, upstream)
        grads["x"] = d_x
        return grads

    return GradCase(tensors, loss, gradients, max_entries=16), state


GRAD_CASES: Dict[str, CaseBuilder] = {
    "dense_linear": _dense_linear,
    "yat_dense": _yat_dense,
    "softermax_head": _softermax_head,
    "e_mha": _e_mha,
    "patch_embed": _patch_embed,
    "global_avg_pool": _global_avg_pool,
    "regularizer": _regularizer,
    "token_mask": _token_mask,
    "e_mlp_composite": _e_mlp_composite,
    "e_vit_block": _e_vit_block,
}


def _entries(
    size: int, limit: Optional[int], state: RngState
) -> Tuple[np.ndarray, RngState]:
    if limit is None or size <= limit:
        return np.arange(size), state
    order, state = rng_permutation(state, size)
    return np.sort(order[:limit]), state


def check_case(
    case: GradCase, tolerance: float, state: RngState, max_entries: Optional[int] = None
) -> Tuple[float, int, int, Optional[str], RngState]:
    """
    Compare one case entry by entry.

    Returns:
        Tuple of (max relative error, failures, checked entries, worst tensor,
        advanced state)
    """
    analytic = case.gradients(case.tensors)
    limits = [x for x in (max_entries, case.max_entries) if x is not None]
    limit = min(limits) if limits else None
    worst, worst_tensor, failures, checked = 0.0, None, 0, 0
    for name, value in case.tensors.items():
        entries, state = _entries(value.size, limit, state)
        for flat in entries:
            shifted = {key: array.copy() for key, array in case.tensors.items()}
            original = value.flat[flat]
            shifted[name].flat[flat] = original + STEP
            plus = case.loss(shifted)
            shifted[name].flat[flat] = original - STEP
            minus = case.loss(shifted)
            numeric = (plus - minus) / (2.0 * STEP)
            exact = float(np.asarray(analytic[name]).flat[flat])
            error = relative_error(exact, numeric)
            checked += 1
            if error > tolerance:
                failures += 1
                logger.debug(
                    f"{name}[{flat}]: analytic {exact}, numeric {numeric}, "
                    f"rel {error:.3e}"
                )
            if error > worst:
                worst, worst_tensor = error, name
    return worst, failures, checked, worst_tensor, state


def grad_check(
    case: Union[str, CaseBuilder],
    trials: int,
    tolerance: float,
    state: RngState,
    max_entries: Optional[int] = None,
) -> Tuple[GradCheckReport, RngState]:
    """
    Run a gradient check over random configurations.

    Args:
        case: Name from GRAD_CASES or a builder state -> (GradCase, state)
        trials: Number of random configurations
        tolerance: Relative error above which an entry counts as a failure
        state: RNG state
        max_entries: Optional cap on checked entries per tensor (random subset)

    Returns:
        Tuple of (GradCheckReport, advanced state)

    Raises:
        DomainError: Unknown case name or trials < 1
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if isinstance(case, str):
        if case not in GRAD_CASES:
            raise DomainError(
                f"unknown gradient case '{case}', expected one of {sorted(GRAD_CASES)}"
            )
        name, builder = case, GRAD_CASES[case]
    else:
        name, builder = getattr(case, "__name__", "custom"), case
    report = GradCheckReport(case=name, trials=trials, tolerance=tolerance)
    for trial in range(trials):
        built, state = builder(state)
        worst, failures, checked, tensor, state = check_case(
            built, tolerance, state, max_entries
        )
        report.failures += failures
        report.checked += checked
        if worst > report.max_rel_err:
            report.max_rel_err = worst
            report.worst_tensor = tensor
        logger.debug(f"{name} trial {trial}: max rel err {worst:.3e}")
    logger.info(
        f"Gradient check {name}: max rel err {report.max_rel_err:.3e} "
        f"over {report.checked} entries"
    )
    return report, state
