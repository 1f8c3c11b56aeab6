#!/usr/bin/env python
"""
Single E-neuron XOR solver.

One yat neuron with two weights and a bias, no scale (alpha = 0, so Θ = 1),
fitted by full-batch gradient descent on the mean squared error against
the XOR targets. Random restarts draw new starting weights; the restart
with the best accuracy (then the lowest error) wins.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from neural_matter_kit.data.synthetic import xor_dataset
from neural_matter_kit.errors import DomainError
from neural_matter_kit.linalg.rng import RngState, rng_normal_matrix
from neural_matter_kit.nn.params import YatDenseParams
from neural_matter_kit.nn.yat_dense import (
    yat_dense_apply,
    yat_dense_backward_cached,
    yat_dense_forward,
)
from neural_matter_kit.train.losses import mse_loss
from neural_matter_kit.yat.products import DEFAULT_EPSILON

logger = logging.getLogger(__name__)

LEARNING_RATE = 0.05
STEPS = 5000
THRESHOLD = 0.5
GRID_SIZE = 400
GRID_RANGE = (-0.5, 1.5)
INIT_SCALE = 1.0


def _neuron(weights: np.ndarray, bias: float, epsilon: float) -> YatDenseParams:
    return YatDenseParams(
        np.asarray(weights, dtype=np.float64)[None, :],
        alpha=0.0,
        bias=np.array([bias]),
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class XorSolution:
    """Best single-neuron fit with its decision surface over GRID_RANGE²."""
    weights: np.ndarray
    bias: float
    epsilon: float
    accuracy: float
    mse: float
    restart: int
    grid_axis: np.ndarray
    grid: np.ndarray

    def params(self) -> YatDenseParams:
        return _neuron(self.weights, self.bias, self.epsilon)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return yat_dense_forward(x, self.params())[:, 0]


@dataclass(frozen=True)
class NeuronFit:
    """One descent run; losses[k] is the MSE before step k, then the final MSE."""
    weights: np.ndarray
    bias: float
    mse: float
    accuracy: float
    losses: np.ndarray


def fit_xor_neuron(
    weights: np.ndarray,
    bias: float,
    epsilon: float = DEFAULT_EPSILON,
    learning_rate: float = LEARNING_RATE,
    steps: int = STEPS,
) -> NeuronFit:
    """Full-batch gradient descent of one unscaled yat neuron on the XOR table."""
    data = xor_dataset()
    features, targets = data.features, data.labels.astype(np.float64)
    params = _neuron(weights, bias, epsilon)
    losses = []
    for _ in range(steps):
        out, cache = yat_dense_apply(features, params)
        loss, grad = mse_loss(out[:, 0], targets)
        losses.append(loss)
        grads = yat_dense_backward_cached(cache, params, grad[:, None])
        kernel = params.kernel - learning_rate * grads.kernel
        new_bias = params.bias - learning_rate * grads.bias
        if not (np.all(np.isfinite(kernel)) and np.all(np.isfinite(new_bias))):
            logger.warning("XOR restart diverged; keeping the last finite parameters")
            break
        params = YatDenseParams(kernel, alpha=0.0, bias=new_bias, epsilon=epsilon)
    out = yat_dense_forward(features, params)[:, 0]
    mse, _ = mse_loss(out, targets)
    losses.append(mse)
    accuracy = float(np.mean((out > THRESHOLD) == (targets > THRESHOLD)))
    return NeuronFit(
        params.kernel[0].copy(), float(params.bias[0]), mse, accuracy, np.array(losses)
    )


def decision_grid(
    weights: np.ndarray, bias: float, epsilon: float = DEFAULT_EPSILON
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Neuron output on a GRID_SIZE×GRID_SIZE lattice over GRID_RANGE².

    Returns:
        Tuple of (axis values, grid) with grid[i, j] the output at (axis[j], axis[i])
    """
    axis = np.linspace(GRID_RANGE[0], GRID_RANGE[1], GRID_SIZE)
    xs, ys = np.meshgrid(axis, axis)
    points = np.column_stack([xs.ravel(), ys.ravel()])
    outputs = yat_dense_forward(points, _neuron(weights, bias, epsilon))[:, 0]
    return axis, outputs.reshape(GRID_SIZE, GRID_SIZE)


def solve_xor(
    restarts: int, state: RngState, epsilon: float = DEFAULT_EPSILON
) -> Tuple[XorSolution, RngState]:
    """
    Fit a single yat neuron to XOR with random restarts.

    Args:
        restarts: Number of random starting points (at least 1)
        state: RNG state
        epsilon: Neuron stabiliser

    Returns:
        Tuple of (best XorSolution, advanced state)

    Raises:
        DomainError: If restarts < 1
    """
    if restarts < 1:
        raise DomainError(f"restarts must be at least 1, got {restarts}")
    best = None
    for restart in range(restarts):
        start, state = rng_normal_matrix(state, 1, 2, INIT_SCALE)
        fit = fit_xor_neuron(start[0], 0.0, epsilon)
        logger.debug(
            f"XOR restart {restart}: accuracy {fit.accuracy:.2f}, mse {fit.mse:.6f}"
        )
        if best is None or (fit.accuracy, -fit.mse) > (best[0].accuracy, -best[0].mse):
            best = (fit, restart)
    fit, restart = best
    axis, grid = decision_grid(fit.weights, fit.bias, epsilon)
    logger.info(
        f"XOR solved with accuracy {fit.accuracy:.2f} "
        f"(restart {restart}, mse {fit.mse:.6f})"
    )
    solution = XorSolution(
        fit.weights, fit.bias, epsilon, fit.accuracy, fit.mse, restart, axis, grid
    )
    return solution, state
