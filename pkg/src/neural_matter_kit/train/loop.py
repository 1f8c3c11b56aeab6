#!/usr/bin/env python
"""
Mini-batch training loop.

Total loss = cross-entropy of the model head + λ · Σ e_regularizer_penalty
over every yat kernel. Batch order is reshuffled each epoch from the run
RNG; everything else is deterministic, so a seed fixes the whole run.
"""

import csv
import logging
import math
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from neural_matter_kit.config.schema import TrainConfig
from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.errors import ConsistencyError, NonFiniteError, ShapeError
from neural_matter_kit.linalg.matrix import ensure_all_finite, ensure_finite
from neural_matter_kit.linalg.rng import RngState, rng_permutation
from neural_matter_kit.nn.checkpoint import save_checkpoint
from neural_matter_kit.nn.model import Model, Params
from neural_matter_kit.train.losses import head_cross_entropy
from neural_matter_kit.train.optim import init_optimizer, optimizer_step
from neural_matter_kit.train.regularizer import e_regularizer, e_regularizer_penalty

logger = logging.getLogger(__name__)

METRICS_HEADER = ("epoch", "loss", "train_acc", "test_acc")


class EpochMetrics(BaseModel):
    """Metrics of one epoch; epoch 0 evaluates the initial parameters."""
    epoch: int = Field(..., ge=0)
    loss: float = Field(
        ..., description="Mean batch loss including the regularizer term"
    )
    train_accuracy: float = Field(..., ge=0.0, le=1.0)
    test_accuracy: float = Field(..., ge=0.0, le=1.0)
    penalty: float = Field(
        0.0, ge=0.0, description="Σ e_regularizer_penalty at the end of the epoch"
    )
    seconds: float = Field(0.0, ge=0.0)

    @field_validator("loss")
    def validate_loss(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"loss must be finite, got {v}")
        return v


class TrainReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    arch: str
    seed: int
    param_count: int
    lambda_reg: float
    epochs: List[EpochMetrics] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0
    checkpoint_path: Optional[str] = None
    final_params: Optional[Dict[str, np.ndarray]] = Field(None, exclude=True)

    @property
    def final(self) -> EpochMetrics:
        return self.epochs[-1]

    def save_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2))
        return path


def total_penalty(model: Model, params: Params) -> float:
    kernels = model.yat_kernels()
    return float(sum(e_regularizer_penalty(params[name], eps) for name, eps in kernels))


def evaluate(
    model: Model, params: Params, data: Dataset, batch_size: int = 1000
) -> Tuple[float, float]:
    """
    Inference-mode mean cross-entropy and accuracy.

    Returns:
        Tuple of (loss, accuracy); (0.0, 0.0) for an empty dataset
    """
    if len(data) == 0:
        return 0.0, 0.0
    loss_sum = 0.0
    correct = 0
    for start in range(0, len(data), batch_size):
        features = data.features[start:start + batch_size]
        labels = data.labels[start:start + batch_size]
        logits, _, _ = model.forward(params, features)
        loss, _, probs = head_cross_entropy(
            logits, labels, model.head, model.head_policy
        )
        loss_sum += loss * len(labels)
        correct += int(np.sum(np.argmax(probs, axis=1) == labels))
    return loss_sum / len(data), correct / len(data)


def _check_data(model: Model, data: Dataset, role: str) -> None:
    if data.dim != model.spec.input_dim:
        raise ShapeError(
            f"{role} data has {data.dim} features, "
            f"model expects {model.spec.input_dim}"
        )
    if data.num_classes > model.spec.num_classes:
        raise ConsistencyError(
            f"{role} data has {data.num_classes} classes, "
            f"model outputs {model.spec.num_classes}"
        )


class _MetricsWriter:
    """Streams epoch metrics as CSV rows, flushing after each one."""

    def __init__(self, path: Optional[Union[str, Path]]) -> None:
        self._handle = None
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(path, "w", newline="")
            self._writer = csv.writer(self._handle)
            self._writer.writerow(METRICS_HEADER)

    def write(self, metrics: EpochMetrics) -> None:
        if self._handle is None:
            return
        self._writer.writerow(
            [
                metrics.epoch,
                repr(metrics.loss),
                repr(metrics.train_accuracy),
                repr(metrics.test_accuracy),
            ]
        )
        self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()


def train_step(
    model: Model,
    params: Params,
    features: np.ndarray,
    labels: np.ndarray,
    lambda_reg: float,
    state: RngState,
) -> Tuple[float, Params, np.ndarray, RngState]:
    """
    One training-mode forward/backward pass.

    Returns:
        Tuple of (total loss, gradients, head probabilities, advanced state)

    Raises:
        NonFiniteError: Naming the first non-finite tensor (logits, loss or a gradient)
    """
    logits, caches, state = model.forward(params, features, state, training=True)
    ensure_finite(logits, "logits")
    loss, d_logits, probs = head_cross_entropy(
        logits, labels, model.head, model.head_policy
    )
    grads, _ = model.backward(params, caches, d_logits)
    if lambda_reg > 0.0:
        for name, eps in model.yat_kernels():
            penalty, grad = e_regularizer(params[name], eps)
            loss += lambda_reg * penalty
            grads[name] = grads[name] + lambda_reg * grad
    if not math.isfinite(loss):
        raise NonFiniteError("loss", f"value {loss}")
    ensure_all_finite({f"grad:{name}": value for name, value in grads.items()})
    return loss, grads, probs, state


def train(
    model: Model,
    data: Tuple[Dataset, Dataset],
    config: TrainConfig,
    state: RngState,
    params: Optional[Params] = None,
    metrics_path: Optional[Union[str, Path]] = None,
    checkpoint_dir: Optional[Union[str, Path]] = None,
) -> Tuple[TrainReport, RngState]:
    """
    Train model on data[0] and evaluate on data[1] after every epoch.

    Args:
        model: Layer stack
        data: (train, test) datasets; capped by max_train_samples / max_test_samples
        config: Training configuration
        state: RNG state; parameters are initialised from it unless given
        params: Optional initial parameters
        metrics_path: Optional CSV receiving (epoch, loss, train_acc, test_acc) rows
        checkpoint_dir: Where the final parameters go when config.save_checkpoint is set

    Returns:
        Tuple of (TrainReport, advanced state)

    Raises:
        ShapeError, ConsistencyError: Data and model disagree
        NonFiniteError: A loss, logit or gradient became non-finite
    """
    started = time.perf_counter()
    train_data = data[0].head(config.max_train_samples)
    test_data = data[1].head(config.max_test_samples)
    _check_data(model, train_data, "train")
    _check_data(model, test_data, "test")
    seed = state.seed
    if params is None:
        params, state = model.init(state)
    else:
        model.check_params(params)
    opt_state = init_optimizer(params)
    report = TrainReport(
        arch=model.spec.arch.value,
        seed=seed,
        param_count=model.param_count(),
        lambda_reg=config.lambda_reg,
    )
    writer = _MetricsWriter(metrics_path)
    try:
        train_loss, train_acc = evaluate(
            model, params, train_data, config.eval_batch_size
        )
        _, test_acc = evaluate(model, params, test_data, config.eval_batch_size)
        penalty = total_penalty(model, params)
        initial = EpochMetrics(
            epoch=0,
            loss=train_loss + config.lambda_reg * penalty,
            train_accuracy=train_acc,
            test_accuracy=test_acc,
            penalty=penalty,
        )
        report.epochs.append(initial)
        writer.write(initial)
        logger.info(
            f"Epoch 0: loss {initial.loss:.4f}, train acc {train_acc:.4f}, "
            f"test acc {test_acc:.4f}"
        )

        count = len(train_data)
        for epoch in range(1, config.epochs + 1):
            epoch_start = time.perf_counter()
            order, state = rng_permutation(state, count)
            loss_sum = 0.0
            correct = 0
            for start in range(0, count, config.batch_size):
                index = order[start:start + config.batch_size]
                labels = train_data.labels[index]
                features = train_data.features[index]
                loss, grads, probs, state = train_step(
                    model, params, features, labels, config.lambda_reg, state
                )
                params, opt_state = optimizer_step(
                    params, grads, opt_state, config.optimizer
                )
                loss_sum += loss * len(index)
                correct += int(np.sum(np.argmax(probs, axis=1) == labels))
                logger.debug(
                    f"Epoch {epoch} batch {start // config.batch_size}: loss {loss:.6f}"
                )
            _, test_acc = evaluate(model, params, test_data, config.eval_batch_size)
            metrics = EpochMetrics(
                epoch=epoch,
                loss=loss_sum / max(count, 1),
                train_accuracy=correct / max(count, 1),
                test_accuracy=test_acc,
                penalty=total_penalty(model, params),
                seconds=time.perf_counter() - epoch_start,
            )
            report.epochs.append(metrics)
            writer.write(metrics)
            logger.info(
                f"Epoch {epoch}: loss {metrics.loss:.4f}, "
                f"train acc {metrics.train_accuracy:.4f}, "
                f"test acc {metrics.test_accuracy:.4f}"
            )
    finally:
        writer.close()

    report.final_params = params
    if config.save_checkpoint and checkpoint_dir is not None:
        report.checkpoint_path = str(save_checkpoint(checkpoint_dir, model, params))
    report.wall_clock_seconds = time.perf_counter() - started
    return report, state
