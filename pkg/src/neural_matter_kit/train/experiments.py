#!/usr/bin/env python
"""
Desk-scale experiments built on the training loop.

compare_baselines trains the E-MLP, the activation-free linear stack and the
ReLU MLP on the same data with the same hidden widths (parameter counts
within half a percent of each other). collapse_experiment trains the same
E-MLP twice on blobs with two near-duplicate classes, with and without the
E-regularizer, and compares the output-layer similarity structure.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from neural_matter_kit.config.loader import load_run_config
from neural_matter_kit.config.schema import Arch, ModelSpec
from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.data.synthetic import synthetic_blobs
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nms.report import (
    NMSReport,
    build_nms,
    max_offdiagonal_similarity,
)
from neural_matter_kit.nn.model import build_model
from neural_matter_kit.train.loop import TrainReport, train

logger = logging.getLogger(__name__)

BASELINE_ARCHS = (Arch.E_MLP, Arch.LINEAR, Arch.MLP)
COLLAPSE_LAMBDAS = (0.0, 1e-3)


class BaselineEntry(BaseModel):
    arch: str
    param_count: int
    final_test_accuracy: float
    report: TrainReport


class ComparisonReport(BaseModel):
    entries: List[BaselineEntry] = Field(default_factory=list)

    def accuracy(self, arch: Union[Arch, str]) -> float:
        name = Arch(arch).value
        return next(
            entry.final_test_accuracy for entry in self.entries if entry.arch == name
        )

    @property
    def e_mlp_margin_over_linear(self) -> Optional[float]:
        archs = {entry.arch for entry in self.entries}
        if not {Arch.E_MLP.value, Arch.LINEAR.value} <= archs:
            return None
        return self.accuracy(Arch.E_MLP) - self.accuracy(Arch.LINEAR)


def compare_baselines(
    data: Tuple[Dataset, Dataset],
    state: RngState,
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    archs: Sequence[Arch] = BASELINE_ARCHS,
    output_dir: Optional[Union[str, Path]] = None,
) -> Tuple[ComparisonReport, RngState]:
    """
    Train each architecture from the same starting state.

    Args:
        data: (train, test) datasets
        state: RNG state shared by every run
        config_path: Optional run configuration applied to every architecture
        overrides: Optional configuration overrides (epochs, seed, ...)
        archs: Architectures to compare
        output_dir: Optional directory for per-architecture metrics CSV files

    Returns:
        Tuple of (ComparisonReport, state after the last run)
    """
    report = ComparisonReport()
    final_state = state
    for arch in archs:
        train_config, spec = load_run_config(config_path, arch, overrides)
        input_shape = list(data[0].image_shape or [data[0].dim])
        spec = ModelSpec.model_validate(
            {**spec.model_dump(), "input_shape": input_shape}
        )
        model = build_model(spec)
        metrics_path = None
        if output_dir is not None:
            metrics_path = Path(output_dir) / f"metrics_{spec.arch.value}.csv"
        run, final_state = train(
            model, data, train_config, state, metrics_path=metrics_path
        )
        report.entries.append(
            BaselineEntry(
                arch=spec.arch.value,
                param_count=run.param_count,
                final_test_accuracy=run.final.test_accuracy,
                report=run,
            )
        )
        logger.info(
            f"{spec.arch.value}: {run.param_count} parameters, "
            f"test accuracy {run.final.test_accuracy:.4f}"
        )
    return report, final_state


class CollapseRun(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    lambda_reg: float
    max_offdiagonal_similarity: float
    collapsed_pairs: int
    final_test_accuracy: float
    nms: NMSReport = Field(..., exclude=True)


class CollapseReport(BaseModel):
    classes: int
    dim: int
    runs: List[CollapseRun] = Field(default_factory=list)

    @property
    def regularizer_reduces_similarity(self) -> bool:
        """Whether the largest λ ends with a lower maximum off-diagonal similarity."""
        ordered = sorted(self.runs, key=lambda run: run.lambda_reg)
        first, last = ordered[0], ordered[-1]
        return last.max_offdiagonal_similarity < first.max_offdiagonal_similarity


def collapse_experiment(
    state: RngState,
    lambdas: Sequence[float] = COLLAPSE_LAMBDAS,
    classes: int = 4,
    per_class: int = 64,
    dim: int = 8,
    hidden: Sequence[int] = (16,),
    epochs: int = 30,
    spread: float = 0.5,
) -> Tuple[CollapseReport, RngState]:
    """
    Train an E-MLP on near-duplicate blobs once per λ and report the output layer.

    Every run starts from the same state, so runs differ only in λ.

    Returns:
        Tuple of (CollapseReport with one NMS report per run, state after data
        generation)
    """
    train_data, state = synthetic_blobs(
        classes, per_class, dim, spread, state, near_duplicate=True
    )
    test_data, state = synthetic_blobs(
        classes, per_class // 2 or 1, dim, spread, state, near_duplicate=True
    )
    report = CollapseReport(classes=classes, dim=dim)
    for lambda_reg in lambdas:
        overrides = {
            "epochs": epochs,
            "batch_size": 32,
            "lambda_reg": lambda_reg,
            "optimizer": {"kind": "adam", "lr": 1e-2},
            "model": {
                "input_shape": [dim],
                "hidden": list(hidden),
                "num_classes": classes,
            },
        }
        train_config, spec = load_run_config(None, Arch.E_MLP, overrides)
        model = build_model(spec)
        run, _ = train(model, (train_data, test_data), train_config, state)
        kernel_name = model.output_kernel()
        nms = build_nms(
            run.final_params[kernel_name],
            spec.epsilon,
            layer_name=f"output (lambda={lambda_reg:g})",
        )
        report.runs.append(
            CollapseRun(
                lambda_reg=lambda_reg,
                max_offdiagonal_similarity=max_offdiagonal_similarity(nms),
                collapsed_pairs=len(nms.collapse_pairs),
                final_test_accuracy=run.final.test_accuracy,
                nms=nms,
            )
        )
        logger.info(
            f"lambda={lambda_reg:g}: max off-diagonal similarity "
            f"{report.runs[-1].max_offdiagonal_similarity:.4g}"
        )
    return report, state
