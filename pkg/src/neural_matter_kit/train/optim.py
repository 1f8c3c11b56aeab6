#!/usr/bin/env python
"""
SGD with momentum and Adam over flat parameter dictionaries.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

import numpy as np

from neural_matter_kit.config.schema import AdamConfig, OptimizerConfig, SGDConfig
from neural_matter_kit.errors import ConsistencyError, ShapeError
from neural_matter_kit.linalg.matrix import ensure_all_finite

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class OptimizerState:
    """Step count plus per-tensor moments (velocity for SGD; m and v for Adam)."""
    step: int = 0
    first: Params = field(default_factory=dict)
    second: Params = field(default_factory=dict)


def init_optimizer(params: Params) -> OptimizerState:
    first = {
        name: np.zeros_like(value, dtype=np.float64) for name, value in params.items()
    }
    second = {name: np.zeros_like(value) for name, value in first.items()}
    return OptimizerState(0, first, second)


def _check(params: Params, grads: Params) -> None:
    if set(params) != set(grads):
        missing = sorted(set(params) - set(grads))
        extra = sorted(set(grads) - set(params))
        raise ConsistencyError(
            f"gradient names differ from parameters: missing {missing}, "
            f"unexpected {extra}"
        )
    for name, value in params.items():
        if np.shape(grads[name]) != np.shape(value):
            raise ShapeError(
                f"gradient '{name}' has shape {np.shape(grads[name])}, "
                f"parameter {np.shape(value)}"
            )


def optimizer_step(
    params: Params,
    grads: Params,
    state: OptimizerState,
    config: Union[OptimizerConfig, SGDConfig, AdamConfig],
) -> Tuple[Params, OptimizerState]:
    """
    Apply one update.

    SGD: v ← μ·v + g, p ← p − lr·v. Adam: bias-corrected first and second
    moments, p ← p − lr·m̂ / (√v̂ + eps).

    Args:
        params: Current parameters
        grads: Gradients with the same names and shapes
        state: Optimizer state from init_optimizer or a previous step
        config: SGDConfig or AdamConfig

    Returns:
        Tuple of (new parameters, new state); inputs are not mutated

    Raises:
        ConsistencyError: Names differ
        ShapeError: A gradient shape differs from its parameter
        NonFiniteError: A gradient or an updated parameter is not finite
    """
    _check(params, grads)
    ensure_all_finite({f"grad:{name}": value for name, value in grads.items()})
    step = state.step + 1
    new_params: Params = {}
    first: Params = {}
    second: Params = {}
    if isinstance(config, SGDConfig):
        for name, value in params.items():
            velocity = config.momentum * state.first.get(name, 0.0) + grads[name]
            first[name] = velocity
            new_params[name] = value - config.lr * velocity
    else:
        correction1 = 1.0 - config.beta1**step
        correction2 = 1.0 - config.beta2**step
        for name, value in params.items():
            g = grads[name]
            m = config.beta1 * state.first.get(name, 0.0) + (1.0 - config.beta1) * g
            v = config.beta2 * state.second.get(name, 0.0) + (1.0 - config.beta2) * g**2
            first[name] = m
            second[name] = v
            m_hat, v_hat = m / correction1, v / correction2
            new_params[name] = value - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    ensure_all_finite(new_params)
    return new_params, OptimizerState(step, first, second)
