#!/usr/bin/env python
"""
Losses, the E-regularizer, optimizers, the training loop, gradient checks,
the XOR solver and the desk-scale experiments.
"""

__all__ = [
    "GRAD_CASES",
    "GradCheckReport",
    "NeuronFit",
    "OptimizerState",
    "TrainReport",
    "XorSolution",
    "collapse_experiment",
    "compare_baselines",
    "cross_entropy",
    "e_regularizer",
    "e_regularizer_penalty",
    "fit_xor_neuron",
    "grad_check",
    "init_optimizer",
    "mse_loss",
    "optimizer_step",
    "softermax_cross_entropy",
    "softmax_cross_entropy",
    "solve_xor",
    "train",
]

from .losses import (
    cross_entropy,
    mse_loss,
    softermax_cross_entropy,
    softmax_cross_entropy,
)
from .regularizer import e_regularizer, e_regularizer_penalty
from .optim import OptimizerState, init_optimizer, optimizer_step
from .loop import TrainReport, train
from .gradcheck import GRAD_CASES, GradCheckReport, grad_check
from .xor import NeuronFit, XorSolution, fit_xor_neuron, solve_xor
from .experiments import collapse_experiment, compare_baselines
